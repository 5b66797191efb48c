use std::collections::HashMap;

use crate::graph_store::Direction;
use crate::query::{QueryGraph, QueryTree};
use crate::transform::VertexId;

/// Candidate data vertices gathered from one starting data vertex.
///
/// `candidates(u, v)` is CR(u, v): the candidates of query vertex `u` when its
/// tree parent is mapped to `v`.
#[derive(Debug, Clone, Default)]
pub struct CandidateRegion {
    start: VertexId,
    root: usize,
    lists: Vec<HashMap<VertexId, (usize, usize)>>,
    buffer: Vec<VertexId>,
}

impl CandidateRegion {
    pub(crate) fn new(root: usize, start: VertexId, query_size: usize) -> Self {
        CandidateRegion {
            start,
            root,
            lists: vec![HashMap::new(); query_size],
            buffer: Vec::new(),
        }
    }

    pub fn start(&self) -> VertexId {
        self.start
    }

    pub(crate) fn has_list(&self, u: usize, parent: VertexId) -> bool {
        self.lists[u].contains_key(&parent)
    }

    pub(crate) fn insert(&mut self, u: usize, parent: VertexId, list: &[VertexId]) {
        let start = self.buffer.len();
        self.buffer.extend_from_slice(list);
        self.lists[u].insert(parent, (start, list.len()));
    }

    pub fn candidates(&self, u: usize, parent: VertexId) -> &[VertexId] {
        if u == self.root {
            return std::slice::from_ref(&self.start);
        }
        match self.lists[u].get(&parent) {
            Some(&(s, n)) => &self.buffer[s..s + n],
            None => &[],
        }
    }

    /// Number of (query vertex, data vertex) candidate entries, counting the
    /// starting vertex once.
    pub fn vertex_count(&self) -> usize {
        1 + self.buffer.len()
    }

    /// Number of root-to-`path`-end embeddings within the region.
    pub fn path_embeddings(&self, path: &[usize]) -> u64 {
        let mut frontier: HashMap<VertexId, u64> = HashMap::from([(self.start, 1)]);
        for &u in &path[1..] {
            let mut next: HashMap<VertexId, u64> = HashMap::new();
            for (&w, &m) in &frontier {
                for &c in self.candidates(u, w) {
                    let e = next.entry(c).or_insert(0);
                    *e = e.saturating_add(m);
                }
            }
            frontier = next;
        }
        frontier.values().fold(0u64, |a, &b| a.saturating_add(b))
    }
}

/// A non-tree edge verified when `u` is bound: the data vertex bound to
/// `other` must reach the candidate in `direction` over the edge's label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeCheck {
    pub edge: usize,
    pub other: usize,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingOrder {
    order: Vec<usize>,
    paths: Vec<Vec<usize>>,
    checks: Vec<Vec<EdgeCheck>>,
}

impl MatchingOrder {
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Required root-to-leaf paths in the order they were concatenated.
    pub fn paths(&self) -> &[Vec<usize>] {
        &self.paths
    }

    /// Edge checks performed at each depth.
    pub fn checks(&self, depth: usize) -> &[EdgeCheck] {
        &self.checks[depth]
    }
}

/// Orders the required root-to-leaf paths of the tree by their number of
/// embeddings in `region` (ties keep depth-first order), concatenates them,
/// then appends OPTIONAL vertices in BFS order.
pub fn determine_matching_order(query: &QueryGraph, tree: &QueryTree, region: &CandidateRegion) -> MatchingOrder {
    let core = |u: usize| query.vertices[u].group.is_none();
    let mut paths: Vec<Vec<usize>> = Vec::new();
    for p in tree.leaf_paths() {
        let cut: Vec<usize> = p.iter().copied().take_while(|&u| core(u)).collect();
        if !paths.contains(&cut) {
            paths.push(cut);
        }
    }
    let snapshot = paths.clone();
    paths.retain(|p| !snapshot.iter().any(|q| q.len() > p.len() && q.starts_with(p)));
    let mut keyed: Vec<(u64, Vec<usize>)> = paths.into_iter().map(|p| (region.path_embeddings(&p), p)).collect();
    keyed.sort_by_key(|(c, _)| *c);
    let paths: Vec<Vec<usize>> = keyed.into_iter().map(|(_, p)| p).collect();

    let mut order: Vec<usize> = Vec::with_capacity(query.vertex_count());
    let mut placed = vec![false; query.vertex_count()];
    for &u in paths.iter().flatten().chain(tree.bfs_order()) {
        if !placed[u] {
            placed[u] = true;
            order.push(u);
        }
    }
    MatchingOrder {
        checks: edge_checks(query, tree, &order),
        order,
        paths,
    }
}

/// Builds a matching order from an explicit permutation; the caller
/// guarantees parents precede children.
pub fn order_from_permutation(query: &QueryGraph, tree: &QueryTree, order: Vec<usize>) -> MatchingOrder {
    MatchingOrder {
        checks: edge_checks(query, tree, &order),
        paths: Vec::new(),
        order,
    }
}

fn edge_checks(query: &QueryGraph, tree: &QueryTree, order: &[usize]) -> Vec<Vec<EdgeCheck>> {
    let mut position = vec![0; order.len()];
    for (i, &u) in order.iter().enumerate() {
        position[u] = i;
    }
    let tree_edges = tree.tree_edges();
    let mut checks = vec![Vec::new(); order.len()];
    for (i, e) in query.edges.iter().enumerate() {
        if tree_edges.contains(&i) {
            continue;
        }
        let (later, other) = if position[e.source] >= position[e.target] {
            (e.source, e.target)
        } else {
            (e.target, e.source)
        };
        // edges of other OPTIONAL blocks are verified when solutions are qualified
        if e.group != query.vertices[later].group {
            continue;
        }
        let direction = if e.source == other {
            Direction::Outgoing
        } else {
            Direction::Incoming
        };
        checks[position[later]].push(EdgeCheck {
            edge: i,
            other,
            direction,
        });
    }
    checks
}
