//! Sorted-list intersection used by the joinability test.

use crate::transform::VertexId;

/// Binary search that counts element comparisons.
pub fn counted_contains(list: &[VertexId], x: VertexId, comparisons: &mut u64) -> bool {
    let (mut lo, mut hi) = (0usize, list.len());
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        *comparisons += 1;
        match list[mid].cmp(&x) {
            std::cmp::Ordering::Equal => return true,
            std::cmp::Ordering::Less => lo = mid + 1,
            std::cmp::Ordering::Greater => hi = mid,
        }
    }
    false
}

fn log2_ceil(n: usize) -> u64 {
    (usize::BITS - n.max(1).leading_zeros()) as u64
}

/// Intersection of two sorted lists. Uses a linear merge when
/// `|a| + |b| <= min * log2(max)` and otherwise iterates the smaller list,
/// binary searching the larger one.
pub fn intersect_two(a: &[VertexId], b: &[VertexId], comparisons: &mut u64) -> Vec<VertexId> {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if small.is_empty() {
        return Vec::new();
    }
    let merge_cost = (a.len() + b.len()) as u64;
    let search_cost = small.len() as u64 * log2_ceil(large.len());
    if merge_cost <= search_cost {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            *comparisons += 1;
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out
    } else {
        small
            .iter()
            .copied()
            .filter(|&x| counted_contains(large, x, comparisons))
            .collect()
    }
}

/// Filters the sorted candidate list down to the vertices present in every
/// adjacency list.
///
/// With `opt_int` the candidates and all lists are intersected pairwise,
/// choosing merge or search per pair; without it each candidate is looked up
/// in each list separately. Both return the same list; `comparisons` counts
/// element comparisons.
pub fn is_joinable(
    candidates: &[VertexId],
    adjacency: &[&[VertexId]],
    opt_int: bool,
    comparisons: &mut u64,
) -> Vec<VertexId> {
    if opt_int {
        let mut lists: Vec<&[VertexId]> = adjacency.to_vec();
        lists.sort_by_key(|l| l.len());
        let mut current = candidates.to_vec();
        for l in lists {
            if current.is_empty() {
                break;
            }
            current = intersect_two(&current, l, comparisons);
        }
        current
    } else {
        candidates
            .iter()
            .copied()
            .filter(|&c| adjacency.iter().all(|l| counted_contains(l, c, comparisons)))
            .collect()
    }
}
