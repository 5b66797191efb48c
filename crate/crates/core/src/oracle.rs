//! Brute-force reference matcher for testing.
//!
//! Enumerates every total assignment of data vertices to query vertices and
//! keeps those satisfying the label, id and edge conditions. OPTIONAL groups
//! are ignored: every query vertex and edge is treated as required.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::engine::Solution;
use crate::query::QueryGraph;
use crate::transform::{DataGraph, EdgeLabelId, VertexId};

pub const ASSIGNMENT_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{0} assignments exceed the brute-force limit")]
    TooLarge(u128),
}

pub fn brute_homomorphisms(query: &QueryGraph, graph: &DataGraph) -> Result<Vec<Solution>, OracleError> {
    enumerate(query, graph, false)
}

pub fn brute_isomorphisms(query: &QueryGraph, graph: &DataGraph) -> Result<Vec<Solution>, OracleError> {
    enumerate(query, graph, true)
}

fn enumerate(query: &QueryGraph, graph: &DataGraph, injective: bool) -> Result<Vec<Solution>, OracleError> {
    if query.unsatisfiable || query.vertex_count() == 0 {
        return Ok(Vec::new());
    }
    let n = graph.vertex_count() as u128;
    let k = query.vertex_count() as u32;
    let total = n.checked_pow(k).unwrap_or(u128::MAX);
    if total > ASSIGNMENT_LIMIT {
        return Err(OracleError::TooLarge(total));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut between: HashMap<(VertexId, VertexId), Vec<EdgeLabelId>> = HashMap::new();
    let mut edge_set: HashSet<(VertexId, EdgeLabelId, VertexId)> = HashSet::new();
    for e in graph.edges() {
        between.entry((e.source, e.target)).or_default().push(e.label);
        edge_set.insert((e.source, e.label, e.target));
    }
    for ls in between.values_mut() {
        ls.sort_unstable();
    }

    let mut out = Vec::new();
    let mut assignment = vec![0 as VertexId; k as usize];
    'outer: loop {
        if accepts(query, graph, &assignment, injective, &edge_set, &between) {
            expand_labels(query, &assignment, &between, &mut out);
        }
        for slot in assignment.iter_mut() {
            *slot += 1;
            if u128::from(*slot) < n {
                continue 'outer;
            }
            *slot = 0;
        }
        break;
    }
    out.sort();
    Ok(out)
}

fn accepts(
    query: &QueryGraph,
    graph: &DataGraph,
    m: &[VertexId],
    injective: bool,
    edge_set: &HashSet<(VertexId, EdgeLabelId, VertexId)>,
    between: &HashMap<(VertexId, VertexId), Vec<EdgeLabelId>>,
) -> bool {
    for (u, qv) in query.vertices.iter().enumerate() {
        let v = m[u];
        if qv.bound.is_some_and(|b| b != v) {
            return false;
        }
        let have = graph.labels(v);
        if !qv.labels.iter().all(|l| have.contains(l)) {
            return false;
        }
    }
    if injective {
        let distinct: HashSet<VertexId> = m.iter().copied().collect();
        if distinct.len() != m.len() {
            return false;
        }
    }
    query.edges.iter().all(|e| {
        let (s, t) = (m[e.source], m[e.target]);
        match e.label {
            Some(l) => edge_set.contains(&(s, l, t)),
            None => between.contains_key(&(s, t)),
        }
    })
}

/// Appends one solution per consistent edge-label choice.
fn expand_labels(
    query: &QueryGraph,
    m: &[VertexId],
    between: &HashMap<(VertexId, VertexId), Vec<EdgeLabelId>>,
    out: &mut Vec<Solution>,
) {
    let options: Vec<Vec<EdgeLabelId>> = query
        .edges
        .iter()
        .map(|e| match e.label {
            Some(l) => vec![l],
            None => between[&(m[e.source], m[e.target])].clone(),
        })
        .collect();
    let mut chosen: Vec<Option<EdgeLabelId>> = vec![None; query.edge_count()];
    fn rec(
        i: usize,
        query: &QueryGraph,
        options: &[Vec<EdgeLabelId>],
        chosen: &mut Vec<Option<EdgeLabelId>>,
        m: &[VertexId],
        out: &mut Vec<Solution>,
    ) {
        if i == options.len() {
            out.push(Solution {
                vertices: m.iter().map(|&v| Some(v)).collect(),
                edge_labels: chosen.clone(),
            });
            return;
        }
        for &l in &options[i] {
            let var = query.edges[i].variable.as_deref();
            let clash =
                var.is_some() && (0..i).any(|j| query.edges[j].variable.as_deref() == var && chosen[j] != Some(l));
            if clash {
                continue;
            }
            chosen[i] = Some(l);
            rec(i + 1, query, options, chosen, m, out);
        }
        chosen[i] = None;
    }
    rec(0, query, &options, &mut chosen, m, out);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::Edge;

    fn twin_cycle() -> (QueryGraph, DataGraph) {
        let mut q = QueryGraph::new();
        for _ in 0..5 {
            q.add_vertex(vec![], None);
        }
        for (s, t, l) in [(0, 1, 0), (0, 4, 1), (2, 1, 0), (2, 3, 0), (3, 4, 2)] {
            q.add_edge(s, t, Some(l));
        }
        let (a, b, c) = (0, 1, 2);
        let edges = [
            (0, a, 1),
            (0, b, 4),
            (2, a, 1),
            (2, a, 3),
            (3, c, 4),
            (2, b, 5),
            (3, c, 5),
        ]
        .map(|(source, label, target)| Edge { source, label, target });
        (q, DataGraph::from_parts(vec![vec![]; 6], 0, 3, edges))
    }

    #[test]
    fn figure_one_counts() {
        let (q, g) = twin_cycle();
        assert_eq!(brute_homomorphisms(&q, &g).unwrap().len(), 3);
        let iso = brute_isomorphisms(&q, &g).unwrap();
        assert_eq!(iso.len(), 1);
        let m: Vec<_> = iso[0].vertices.iter().map(|v| v.unwrap()).collect();
        assert_eq!(m, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn single_blank_vertex_matches_every_vertex() {
        let (_, g) = twin_cycle();
        let mut q = QueryGraph::new();
        q.add_vertex(vec![], None);
        assert_eq!(brute_isomorphisms(&q, &g).unwrap().len(), 6);
    }

    #[test]
    fn required_labels_larger_than_data() {
        let g = DataGraph::from_parts(vec![vec![0], vec![1]], 2, 1, vec![]);
        let mut q = QueryGraph::new();
        q.add_vertex(vec![0], None);
        q.add_vertex(vec![0], None);
        q.add_vertex(vec![1], None);
        assert!(brute_isomorphisms(&q, &g).unwrap().is_empty());
    }

    #[test]
    fn guard_rejects_huge_instances() {
        let g = DataGraph::from_parts(vec![vec![]; 100], 0, 0, vec![]);
        let mut q = QueryGraph::new();
        for _ in 0..4 {
            q.add_vertex(vec![], None);
        }
        assert!(matches!(brute_homomorphisms(&q, &g), Err(OracleError::TooLarge(_))));
    }

    #[test]
    fn isomorphisms_are_the_injective_homomorphisms() {
        let (q, g) = twin_cycle();
        let hom = brute_homomorphisms(&q, &g).unwrap();
        let injective: Vec<Solution> = hom
            .into_iter()
            .filter(|s| {
                let set: HashSet<_> = s.vertices.iter().collect();
                set.len() == s.vertices.len()
            })
            .collect();
        assert_eq!(injective, brute_isomorphisms(&q, &g).unwrap());
    }
}
