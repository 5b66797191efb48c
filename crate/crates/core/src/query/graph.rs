use std::collections::VecDeque;

use super::parser::QueryError;
use crate::graph_store::Direction;
use crate::transform::{EdgeLabelId, LabelId, VertexId};

pub type GroupId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryVertex {
    /// Display name: `?x` for variables, the constant's N-Triples form otherwise.
    pub name: String,
    pub variable: Option<String>,
    /// Required labels, sorted; empty means any vertex.
    pub labels: Vec<LabelId>,
    /// Required data vertex id for constants.
    pub bound: Option<VertexId>,
    /// Innermost OPTIONAL block introducing this vertex; `None` for the required core.
    pub group: Option<GroupId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryEdge {
    pub source: usize,
    pub target: usize,
    /// `None` when the predicate is a variable.
    pub label: Option<EdgeLabelId>,
    pub variable: Option<String>,
    pub group: Option<GroupId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptionalGroup {
    pub parent: Option<GroupId>,
    /// False when the block references a constant absent from the data, so
    /// it can never match; its vertices and edges are omitted.
    pub satisfiable: bool,
}

/// A transformed query: labeled vertices, labeled edges and optional blocks.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QueryGraph {
    pub vertices: Vec<QueryVertex>,
    pub edges: Vec<QueryEdge>,
    pub groups: Vec<OptionalGroup>,
    /// Set when a required constant does not occur in the data.
    pub unsatisfiable: bool,
}

impl QueryGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// A graph that matches nothing.
    pub fn empty_result() -> Self {
        QueryGraph {
            unsatisfiable: true,
            ..Self::default()
        }
    }

    pub fn add_vertex(&mut self, labels: Vec<LabelId>, bound: Option<VertexId>) -> usize {
        let idx = self.vertices.len();
        let mut labels = labels;
        labels.sort_unstable();
        labels.dedup();
        self.vertices.push(QueryVertex {
            name: format!("?u{idx}"),
            variable: Some(format!("u{idx}")),
            labels,
            bound,
            group: None,
        });
        idx
    }

    pub fn add_edge(&mut self, source: usize, target: usize, label: Option<EdgeLabelId>) -> usize {
        let idx = self.edges.len();
        self.edges.push(QueryEdge {
            source,
            target,
            label,
            variable: None,
            group: None,
        });
        idx
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_optional(&self, u: usize) -> bool {
        self.vertices[u].group.is_some()
    }

    pub fn has_optional(&self) -> bool {
        !self.groups.is_empty()
    }

    pub fn group_depth(&self, group: Option<GroupId>) -> usize {
        let mut depth = 0;
        let mut g = group;
        while let Some(id) = g {
            depth += 1;
            g = self.groups[id].parent;
        }
        depth
    }

    /// Whether `group` is `ancestor` or nested inside it.
    pub fn group_within(&self, group: Option<GroupId>, ancestor: GroupId) -> bool {
        let mut g = group;
        while let Some(id) = g {
            if id == ancestor {
                return true;
            }
            g = self.groups[id].parent;
        }
        false
    }

    /// Query edges incident to `u`, as (edge index, other endpoint, direction
    /// seen from `u`). A self loop is listed once per direction.
    pub fn incident(&self, u: usize) -> Vec<(usize, usize, Direction)> {
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.source == u {
                out.push((i, e.target, Direction::Outgoing));
            }
            if e.target == u {
                out.push((i, e.source, Direction::Incoming));
            }
        }
        out
    }

    pub fn degree(&self, u: usize) -> usize {
        self.edges
            .iter()
            .map(|e| usize::from(e.source == u) + usize::from(e.target == u))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeLink {
    pub parent: usize,
    pub edge: usize,
    /// Direction of the tree edge as seen from the parent.
    pub direction: Direction,
}

/// BFS spanning tree of a query graph rooted at the start vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryTree {
    root: usize,
    bfs_order: Vec<usize>,
    links: Vec<Option<TreeLink>>,
    children: Vec<Vec<usize>>,
    non_tree: Vec<Vec<usize>>,
}

impl QueryTree {
    pub fn root(&self) -> usize {
        self.root
    }

    pub fn bfs_order(&self) -> &[usize] {
        &self.bfs_order
    }

    pub fn link(&self, u: usize) -> Option<TreeLink> {
        self.links[u]
    }

    pub fn parent(&self, u: usize) -> Option<usize> {
        self.links[u].map(|l| l.parent)
    }

    pub fn children(&self, u: usize) -> &[usize] {
        &self.children[u]
    }

    /// Non-tree edges recorded at `u`, the later-visited endpoint.
    pub fn non_tree_edges(&self, u: usize) -> &[usize] {
        &self.non_tree[u]
    }

    pub fn tree_edges(&self) -> Vec<usize> {
        self.bfs_order
            .iter()
            .filter_map(|&u| self.links[u].map(|l| l.edge))
            .collect()
    }

    pub fn all_non_tree_edges(&self) -> Vec<usize> {
        self.bfs_order
            .iter()
            .flat_map(|&u| self.non_tree[u].iter().copied())
            .collect()
    }

    /// Root-to-leaf paths in depth-first order, children visited by index.
    pub fn leaf_paths(&self) -> Vec<Vec<usize>> {
        let mut paths = Vec::new();
        let mut stack = vec![vec![self.root]];
        while let Some(path) = stack.pop() {
            let last = *path.last().unwrap();
            let kids = &self.children[last];
            if kids.is_empty() {
                paths.push(path);
            } else {
                for &c in kids.iter().rev() {
                    let mut p = path.clone();
                    p.push(c);
                    stack.push(p);
                }
            }
        }
        paths
    }
}

/// Builds the BFS query tree from `start`.
///
/// Siblings are visited in vertex index order, i.e. by first textual
/// occurrence. Required vertices are spanned first using required edges only;
/// each OPTIONAL block is then attached through its own edges, outer blocks
/// before nested ones.
pub fn build_query_tree(query: &QueryGraph, start: usize) -> Result<QueryTree, QueryError> {
    let n = query.vertex_count();
    assert!(start < n, "start vertex out of range");
    let mut incident: Vec<Vec<(usize, usize, Direction)>> = vec![Vec::new(); n];
    for (i, e) in query.edges.iter().enumerate() {
        if e.source != e.target {
            incident[e.source].push((e.target, i, Direction::Outgoing));
            incident[e.target].push((e.source, i, Direction::Incoming));
        }
    }
    for list in &mut incident {
        list.sort_unstable_by_key(|&(w, e, _)| (w, e));
    }
    let layer_of: Vec<usize> = query.vertices.iter().map(|v| query.group_depth(v.group)).collect();
    let max_layer = layer_of.iter().copied().max().unwrap_or(0);

    let mut visited = vec![false; n];
    let mut links = vec![None; n];
    let mut children = vec![Vec::new(); n];
    let mut bfs_order = vec![start];
    visited[start] = true;
    for layer in 0..=max_layer {
        let mut queue: VecDeque<usize> = bfs_order.iter().copied().collect();
        while let Some(x) = queue.pop_front() {
            for &(w, e, dir) in &incident[x] {
                if visited[w] || layer_of[w] > layer || query.edges[e].group != query.vertices[w].group {
                    continue;
                }
                visited[w] = true;
                links[w] = Some(TreeLink {
                    parent: x,
                    edge: e,
                    direction: dir,
                });
                children[x].push(w);
                bfs_order.push(w);
                queue.push_back(w);
            }
        }
    }
    if let Some(u) = (0..n).find(|&u| !visited[u]) {
        return Err(QueryError::Disconnected(query.vertices[u].name.clone()));
    }
    for kids in &mut children {
        kids.sort_unstable();
    }

    let mut position = vec![0; n];
    for (i, &u) in bfs_order.iter().enumerate() {
        position[u] = i;
    }
    let tree_edges: Vec<usize> = links.iter().flatten().map(|l| l.edge).collect();
    let mut non_tree = vec![Vec::new(); n];
    for (i, e) in query.edges.iter().enumerate() {
        if tree_edges.contains(&i) {
            continue;
        }
        let later = if position[e.source] >= position[e.target] {
            e.source
        } else {
            e.target
        };
        non_tree[later].push(i);
    }
    Ok(QueryTree {
        root: start,
        bfs_order,
        links,
        children,
        non_tree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Four vertices, every pair connected (the matching-order example).
    fn clique4() -> QueryGraph {
        let mut q = QueryGraph::new();
        for l in 0..4 {
            q.add_vertex(vec![l], None);
        }
        for (s, t) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            q.add_edge(s, t, None);
        }
        q
    }

    #[test]
    fn clique_tree_from_first_vertex() {
        let q = clique4();
        let t = build_query_tree(&q, 0).unwrap();
        assert_eq!(t.bfs_order(), &[0, 1, 2, 3]);
        let non_tree: Vec<(usize, usize)> = t
            .all_non_tree_edges()
            .into_iter()
            .map(|e| (q.edges[e].source, q.edges[e].target))
            .collect();
        assert_eq!(non_tree, vec![(1, 2), (1, 3), (2, 3)]);
        assert_eq!(t.tree_edges().len() + t.all_non_tree_edges().len(), q.edge_count());
        assert_eq!(t.leaf_paths(), vec![vec![0, 1], vec![0, 2], vec![0, 3]]);
    }

    #[test]
    fn triangle_tree_from_middle_vertex() {
        let mut q = QueryGraph::new();
        for l in 1..4 {
            q.add_vertex(vec![l], None);
        }
        q.add_edge(0, 1, Some(0));
        q.add_edge(0, 2, Some(1));
        q.add_edge(2, 1, Some(2));
        let t = build_query_tree(&q, 1).unwrap();
        assert_eq!(t.tree_edges().len(), 2);
        assert_eq!(t.all_non_tree_edges(), vec![1]);
        assert_eq!(t.non_tree_edges(2), &[1]);
        assert_eq!(
            t.link(0),
            Some(TreeLink {
                parent: 1,
                edge: 0,
                direction: Direction::Incoming
            })
        );
    }

    #[test]
    fn single_vertex_tree() {
        let mut q = QueryGraph::new();
        q.add_vertex(vec![], None);
        let t = build_query_tree(&q, 0).unwrap();
        assert_eq!(t.bfs_order(), &[0]);
        assert_eq!(t.leaf_paths(), vec![vec![0]]);
    }

    #[test]
    fn disconnected_query_is_rejected() {
        let mut q = QueryGraph::new();
        q.add_vertex(vec![], None);
        q.add_vertex(vec![], None);
        q.add_vertex(vec![], None);
        q.add_edge(0, 1, None);
        assert_eq!(build_query_tree(&q, 0), Err(QueryError::Disconnected("?u2".into())));
    }

    #[test]
    fn optional_vertices_hang_off_the_core() {
        // core: 0 -> 1; optional: 1 -> 2 and 0 -> 2
        let mut q = QueryGraph::new();
        for _ in 0..3 {
            q.add_vertex(vec![], None);
        }
        q.groups.push(OptionalGroup {
            parent: None,
            satisfiable: true,
        });
        q.vertices[2].group = Some(0);
        q.add_edge(0, 1, None);
        let e = q.add_edge(0, 2, None);
        q.edges[e].group = Some(0);
        let e = q.add_edge(1, 2, None);
        q.edges[e].group = Some(0);
        let t = build_query_tree(&q, 1).unwrap();
        assert_eq!(t.bfs_order(), &[1, 0, 2]);
        assert_eq!(t.parent(2), Some(1));
        assert_eq!(t.non_tree_edges(2), &[1]);
    }

    #[test]
    fn self_loop_is_a_non_tree_edge() {
        let mut q = QueryGraph::new();
        q.add_vertex(vec![], None);
        q.add_edge(0, 0, Some(0));
        let t = build_query_tree(&q, 0).unwrap();
        assert_eq!(t.non_tree_edges(0), &[0]);
    }
}
