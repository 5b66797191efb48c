//! Candidate-region matcher enumerating e-graph homomorphisms (or subgraph
//! isomorphisms) of a query graph in a [`GraphStore`].
//!
//! For each candidate of the starting query vertex the matcher explores a
//! candidate region along the BFS query tree, orders the query paths by their
//! number of embeddings, and backtracks over the region. Non-tree edges are
//! verified by intersecting candidate lists with adjacency lists.

pub mod join;
mod region;

use std::borrow::Cow;
use std::collections::HashMap;

use thiserror::Error;

use crate::graph_store::{Direction, GraphStore, LabelMatch};
use crate::query::{build_query_tree, QueryError, QueryGraph, QueryTree};
use crate::transform::{EdgeLabelId, LabelId, VertexId};

pub use join::{counted_contains, intersect_two, is_joinable};
pub use region::{determine_matching_order, order_from_permutation, CandidateRegion, EdgeCheck, MatchingOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchMode {
    #[default]
    Homomorphism,
    Isomorphism,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub mode: MatchMode,
    /// Verify non-tree edges with one k-way intersection.
    pub opt_int: bool,
    pub use_nlf: bool,
    pub use_deg: bool,
    /// Compute the matching order once and reuse it for every region.
    pub reuse_order: bool,
    /// Number of best-ranked query vertices refined when choosing the start.
    pub top_k: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            mode: MatchMode::Homomorphism,
            opt_int: true,
            use_nlf: false,
            use_deg: false,
            reuse_order: true,
            top_k: 3,
        }
    }
}

impl EngineConfig {
    pub fn isomorphism() -> Self {
        EngineConfig {
            mode: MatchMode::Isomorphism,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("worker thread panicked: {0}")]
    Execution(String),
}

/// One match: a data vertex per query vertex and an edge label per query
/// edge. `None` marks OPTIONAL parts that did not match.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Solution {
    pub vertices: Vec<Option<VertexId>>,
    pub edge_labels: Vec<Option<EdgeLabelId>>,
}

pub trait SolutionSink {
    fn emit(&mut self, solution: &Solution);
}

impl SolutionSink for Vec<Solution> {
    fn emit(&mut self, solution: &Solution) {
        self.push(solution.clone());
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CountSink(pub u64);

impl SolutionSink for CountSink {
    fn emit(&mut self, _: &Solution) {
        self.0 += 1;
    }
}

impl<F: FnMut(&Solution)> SolutionSink for F {
    fn emit(&mut self, solution: &Solution) {
        self(solution)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EngineStats {
    pub start_vertices: usize,
    pub regions: usize,
    pub nonempty_regions: usize,
    /// Sum of candidate region sizes.
    pub region_vertices: usize,
    pub solutions: u64,
    pub comparisons: u64,
}

impl EngineStats {
    pub fn merge(&mut self, other: &EngineStats) {
        self.start_vertices += other.start_vertices;
        self.regions += other.regions;
        self.nonempty_regions += other.nonempty_regions;
        self.region_vertices += other.region_vertices;
        self.solutions += other.solutions;
        self.comparisons += other.comparisons;
    }
}

/// Per-candidate predicate `(query vertex, data vertex) -> keep`, applied
/// while candidate lists are built.
pub type CandidateFilter<'h> = &'h (dyn Fn(usize, VertexId) -> bool + Sync);

#[derive(Clone, Copy, Default)]
pub struct SearchHooks<'h> {
    pub candidate: Option<CandidateFilter<'h>>,
}

/// Degree and neighbor-label requirements of a required query vertex.
#[derive(Debug, Clone, Default)]
struct Requirements {
    min_degree: usize,
    neighbors: Vec<(Direction, Option<EdgeLabelId>, Vec<LabelId>)>,
}

/// Mutable search state of one worker.
#[derive(Debug, Clone)]
pub struct SearchState {
    mapping: Vec<Option<VertexId>>,
    visited: Vec<bool>,
}

/// A query prepared for matching against one store.
pub struct Matcher<'a> {
    query: &'a QueryGraph,
    store: &'a GraphStore,
    config: EngineConfig,
    hooks: SearchHooks<'a>,
    root: usize,
    tree: QueryTree,
    starts: Vec<VertexId>,
    requirements: Vec<Requirements>,
}

/// Picks the starting query vertex among the required ones: rank by
/// frequency over degree, then refine the `top_k` best by the number of
/// start candidates. Returns `None` when a required vertex has no candidate.
pub fn choose_start_vertex(query: &QueryGraph, store: &GraphStore, config: &EngineConfig) -> Option<usize> {
    let requirements = requirements(query);
    choose_start(query, store, config, &requirements)
}

fn choose_start(
    query: &QueryGraph,
    store: &GraphStore,
    config: &EngineConfig,
    requirements: &[Requirements],
) -> Option<usize> {
    let core: Vec<usize> = (0..query.vertex_count()).filter(|&u| !query.is_optional(u)).collect();
    let mut ranked = Vec::with_capacity(core.len());
    for &u in &core {
        let freq = frequency(query, store, u);
        if freq == 0 {
            return None;
        }
        let degree = core_degree(query, u).max(1);
        ranked.push((freq as f64 / degree as f64, u));
    }
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut best: Option<(usize, usize)> = None;
    for &(_, u) in ranked.iter().take(config.top_k.max(1)) {
        let score = if config.use_deg || config.use_nlf {
            start_candidates(query, store, u)
                .iter()
                .filter(|&&v| passes_filters(store, config, &requirements[u], v))
                .count()
        } else {
            frequency(query, store, u)
        };
        if best.is_none_or(|(s, _)| score < s) {
            best = Some((score, u));
        }
    }
    best.map(|(_, u)| u)
}

fn core_degree(query: &QueryGraph, u: usize) -> usize {
    query
        .edges
        .iter()
        .filter(|e| e.group.is_none())
        .map(|e| usize::from(e.source == u) + usize::from(e.target == u))
        .sum()
}

/// freq(g, L(u)), falling back to the bound id or the predicate index.
fn frequency(query: &QueryGraph, store: &GraphStore, u: usize) -> usize {
    let qv = &query.vertices[u];
    if let Some(id) = qv.bound {
        return usize::from((id as usize) < store.vertex_count() && store.has_labels(id, &qv.labels));
    }
    if !qv.labels.is_empty() {
        return store.frequency(&qv.labels);
    }
    match predicate_list(query, store, u) {
        Some(list) => list.len(),
        None => store.vertex_count(),
    }
}

/// Smallest predicate-index list among the labeled required edges of `u`.
fn predicate_list<'s>(query: &QueryGraph, store: &'s GraphStore, u: usize) -> Option<&'s [VertexId]> {
    let mut best: Option<&[VertexId]> = None;
    for e in query.edges.iter().filter(|e| e.group == query.vertices[u].group) {
        let Some(el) = e.label else { continue };
        for (end, dir) in [(e.source, Direction::Outgoing), (e.target, Direction::Incoming)] {
            if end == u {
                let list = store.predicate_endpoints(el, dir);
                if best.is_none_or(|b| list.len() < b.len()) {
                    best = Some(list);
                }
            }
        }
    }
    best
}

fn start_candidates(query: &QueryGraph, store: &GraphStore, u: usize) -> Vec<VertexId> {
    let qv = &query.vertices[u];
    if let Some(id) = qv.bound {
        return if (id as usize) < store.vertex_count() && store.has_labels(id, &qv.labels) {
            vec![id]
        } else {
            Vec::new()
        };
    }
    match store.vertices_with_labels(&qv.labels) {
        LabelMatch::Vertices(list) => list.into_owned(),
        LabelMatch::AllVertices => match predicate_list(query, store, u) {
            Some(list) => list.to_vec(),
            None => (0..store.vertex_count() as VertexId).collect(),
        },
    }
}

fn requirements(query: &QueryGraph) -> Vec<Requirements> {
    (0..query.vertex_count())
        .map(|u| {
            if query.is_optional(u) {
                return Requirements::default();
            }
            let mut concrete: Vec<(Direction, EdgeLabelId)> = Vec::new();
            let mut any_edge = false;
            let mut neighbors = Vec::new();
            for (e, other, dir) in query.incident(u) {
                let edge = &query.edges[e];
                if edge.group.is_some() {
                    continue;
                }
                any_edge = true;
                if let Some(el) = edge.label {
                    if !concrete.contains(&(dir, el)) {
                        concrete.push((dir, el));
                    }
                }
                let key = (dir, edge.label, query.vertices[other].labels.clone());
                if !neighbors.contains(&key) {
                    neighbors.push(key);
                }
            }
            Requirements {
                min_degree: concrete.len().max(usize::from(any_edge)),
                neighbors,
            }
        })
        .collect()
}

fn passes_filters(store: &GraphStore, config: &EngineConfig, req: &Requirements, v: VertexId) -> bool {
    if config.use_deg && store.degree(v) < req.min_degree {
        return false;
    }
    if config.use_nlf {
        return req
            .neighbors
            .iter()
            .all(|(dir, el, labels)| !store.adjacent(v, *dir, *el, labels).is_empty());
    }
    true
}

impl<'a> Matcher<'a> {
    /// Prepares `query`. Returns `Ok(None)` when the result is provably empty.
    pub fn new(
        query: &'a QueryGraph,
        store: &'a GraphStore,
        config: EngineConfig,
        hooks: SearchHooks<'a>,
    ) -> Result<Option<Self>, EngineError> {
        if query.unsatisfiable || query.vertex_count() == 0 {
            return Ok(None);
        }
        let requirements = requirements(query);
        let Some(root) = choose_start(query, store, &config, &requirements) else {
            return Ok(None);
        };
        Self::with_root(query, store, config, hooks, root).map(Some)
    }

    /// Prepares `query` with an explicit starting query vertex.
    pub fn with_root(
        query: &'a QueryGraph,
        store: &'a GraphStore,
        config: EngineConfig,
        hooks: SearchHooks<'a>,
        root: usize,
    ) -> Result<Self, EngineError> {
        let requirements = requirements(query);
        let tree = build_query_tree(query, root)?;
        let starts = start_candidates(query, store, root);
        Ok(Matcher {
            query,
            store,
            config,
            hooks,
            root,
            tree,
            starts,
            requirements,
        })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn tree(&self) -> &QueryTree {
        &self.tree
    }

    /// Candidate data vertices of the starting query vertex, before filters.
    pub fn start_candidates(&self) -> &[VertexId] {
        &self.starts
    }

    pub fn new_state(&self) -> SearchState {
        SearchState {
            mapping: vec![None; self.query.vertex_count()],
            visited: match self.config.mode {
                MatchMode::Isomorphism => vec![false; self.store.vertex_count()],
                MatchMode::Homomorphism => Vec::new(),
            },
        }
    }

    fn candidate_ok(&self, u: usize, v: VertexId) -> bool {
        let qv = &self.query.vertices[u];
        if qv.bound.is_some_and(|b| b != v) {
            return false;
        }
        if qv.group.is_none() && !passes_filters(self.store, &self.config, &self.requirements[u], v) {
            return false;
        }
        self.hooks.candidate.is_none_or(|f| f(u, v))
    }

    /// Explores the candidate region of starting data vertex `start`.
    /// Returns `None` if some required query vertex has no candidate.
    pub fn explore(&self, start: VertexId) -> Option<CandidateRegion> {
        if !self.store.has_labels(start, &self.query.vertices[self.root].labels) || !self.candidate_ok(self.root, start)
        {
            return None;
        }
        let mut region = CandidateRegion::new(self.root, start, self.query.vertex_count());
        let mut valid: Vec<HashMap<VertexId, bool>> = vec![HashMap::new(); self.query.vertex_count()];
        self.explore_from(self.root, start, &mut region, &mut valid)
            .then_some(region)
    }

    fn explore_from(
        &self,
        u: usize,
        v: VertexId,
        region: &mut CandidateRegion,
        valid: &mut [HashMap<VertexId, bool>],
    ) -> bool {
        if let Some(&known) = valid[u].get(&v) {
            return known;
        }
        valid[u].insert(v, true);
        let mut ok = true;
        for &c in self.tree.children(u) {
            if !region.has_list(c, v) {
                let link = self.tree.link(c).expect("child has a tree link");
                let label = self.query.edges[link.edge].label;
                let adjacent = self
                    .store
                    .adjacent(v, link.direction, label, &self.query.vertices[c].labels);
                let iso = self.config.mode == MatchMode::Isomorphism;
                let mut list = Vec::new();
                for &w in adjacent.iter() {
                    if iso && w == v {
                        continue;
                    }
                    if self.candidate_ok(c, w) && self.explore_from(c, w, region, valid) {
                        list.push(w);
                    }
                }
                region.insert(c, v, &list);
            }
            if region.candidates(c, v).is_empty() && !self.query.is_optional(c) {
                ok = false;
                break;
            }
        }
        valid[u].insert(v, ok);
        ok
    }

    pub fn order(&self, region: &CandidateRegion) -> MatchingOrder {
        determine_matching_order(self.query, &self.tree, region)
    }

    /// The matching order of the first starting vertex with a non-empty
    /// region, if any.
    pub fn first_order(&self) -> Option<MatchingOrder> {
        self.starts
            .iter()
            .find_map(|&v| self.explore(v))
            .map(|r| self.order(&r))
    }

    /// Matches from each starting vertex in `starts`, in order.
    pub fn run(
        &self,
        starts: &[VertexId],
        reuse: Option<&MatchingOrder>,
        state: &mut SearchState,
        sink: &mut dyn SolutionSink,
        stats: &mut EngineStats,
    ) {
        let mut own: Option<MatchingOrder> = None;
        for &v in starts {
            stats.start_vertices += 1;
            stats.regions += 1;
            let Some(region) = self.explore(v) else { continue };
            stats.nonempty_regions += 1;
            stats.region_vertices += region.vertex_count();
            if !self.config.reuse_order {
                let order = self.order(&region);
                self.search(0, &region, &order, state, sink, stats);
                continue;
            }
            if reuse.is_none() && own.is_none() {
                own = Some(self.order(&region));
            }
            let order = reuse.or(own.as_ref()).expect("order computed above");
            self.search(0, &region, order, state, sink, stats);
        }
    }

    /// Backtracking search at depth `depth` of `order`.
    pub fn search(
        &self,
        depth: usize,
        region: &CandidateRegion,
        order: &MatchingOrder,
        state: &mut SearchState,
        sink: &mut dyn SolutionSink,
        stats: &mut EngineStats,
    ) {
        if depth == order.order().len() {
            self.emit(state, sink, stats);
            return;
        }
        let u = order.order()[depth];
        let optional = self.query.is_optional(u);
        let candidates = match self.tree.parent(u) {
            None => region.candidates(u, region.start()),
            Some(p) => match state.mapping[p] {
                Some(pv) => region.candidates(u, pv),
                None => &[],
            },
        };
        let joinable = self.joinable(u, candidates, order.checks(depth), state, stats);
        let iso = self.config.mode == MatchMode::Isomorphism;
        let mut matched = false;
        for v in joinable.iter().copied() {
            if iso && state.visited[v as usize] {
                continue;
            }
            matched = true;
            state.mapping[u] = Some(v);
            if iso {
                state.visited[v as usize] = true;
            }
            self.search(depth + 1, region, order, state, sink, stats);
            if iso {
                state.visited[v as usize] = false;
            }
        }
        state.mapping[u] = None;
        if !matched && optional {
            self.search(depth + 1, region, order, state, sink, stats);
        }
    }

    fn joinable<'c>(
        &self,
        u: usize,
        candidates: &'c [VertexId],
        checks: &[EdgeCheck],
        state: &SearchState,
        stats: &mut EngineStats,
    ) -> Cow<'c, [VertexId]> {
        if checks.is_empty() || candidates.is_empty() {
            return Cow::Borrowed(candidates);
        }
        let labels = &self.query.vertices[u].labels;
        let lookup_labels: &[LabelId] = if labels.len() == 1 { labels } else { &[] };
        let mut lists: Vec<Cow<'_, [VertexId]>> = Vec::new();
        let mut self_loops: Vec<Option<EdgeLabelId>> = Vec::new();
        for c in checks {
            let label = self.query.edges[c.edge].label;
            if c.other == u {
                self_loops.push(label);
                continue;
            }
            // the other endpoint is an OPTIONAL vertex that was nulled
            let Some(w) = state.mapping[c.other] else { continue };
            lists.push(self.store.adjacent(w, c.direction, label, lookup_labels));
        }
        let refs: Vec<&[VertexId]> = lists.iter().map(|l| l.as_ref()).collect();
        let mut out = is_joinable(candidates, &refs, self.config.opt_int, &mut stats.comparisons);
        if !self_loops.is_empty() {
            out.retain(|&v| self_loops.iter().all(|&l| self.store.has_edge(v, v, l)));
        }
        Cow::Owned(out)
    }

    /// Resolves edge labels for the current mapping and emits one solution
    /// per consistent choice of labels for blank query edges.
    fn emit(&self, state: &SearchState, sink: &mut dyn SolutionSink, stats: &mut EngineStats) {
        let query = self.query;
        let mut labels: Vec<Option<EdgeLabelId>> = vec![None; query.edge_count()];
        // choice slots: edges sharing a predicate variable share one slot
        let mut slots: Vec<(Vec<usize>, Vec<EdgeLabelId>)> = Vec::new();
        let mut slot_of_var: HashMap<&str, usize> = HashMap::new();
        for (i, e) in query.edges.iter().enumerate() {
            let (Some(s), Some(t)) = (state.mapping[e.source], state.mapping[e.target]) else {
                continue;
            };
            match e.label {
                Some(l) => {
                    if self.store.has_edge(s, t, Some(l)) {
                        labels[i] = Some(l);
                    }
                }
                None => {
                    let options: Vec<EdgeLabelId> = self.store.labels_between(s, t).collect();
                    if options.is_empty() {
                        continue;
                    }
                    match e.variable.as_deref().and_then(|v| slot_of_var.get(v).copied()) {
                        Some(k) => {
                            let slot = &mut slots[k];
                            slot.0.push(i);
                            slot.1.retain(|l| options.contains(l));
                        }
                        None => {
                            if let Some(v) = e.variable.as_deref() {
                                slot_of_var.insert(v, slots.len());
                            }
                            slots.push((vec![i], options));
                        }
                    }
                }
            }
        }
        for (edges, options) in &slots {
            if options.is_empty() && edges.iter().any(|&i| query.edges[i].group.is_none()) {
                return;
            }
        }
        let mut solution = Solution {
            vertices: state.mapping.clone(),
            edge_labels: labels,
        };
        let live: Vec<&(Vec<usize>, Vec<EdgeLabelId>)> = slots.iter().filter(|s| !s.1.is_empty()).collect();
        let mut choice = vec![0usize; live.len()];
        loop {
            for (k, (edges, options)) in live.iter().enumerate() {
                for &i in edges {
                    solution.edge_labels[i] = Some(options[choice[k]]);
                }
            }
            stats.solutions += 1;
            sink.emit(&solution);
            // odometer over the slots
            let mut k = 0;
            loop {
                if k == live.len() {
                    return;
                }
                choice[k] += 1;
                if choice[k] < live[k].1.len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
    }
}

/// Enumerates every match of `query` into `sink`, single-threaded.
pub fn execute(
    query: &QueryGraph,
    store: &GraphStore,
    config: &EngineConfig,
    sink: &mut dyn SolutionSink,
) -> Result<EngineStats, EngineError> {
    execute_with(query, store, config, SearchHooks::default(), sink)
}

pub fn execute_with(
    query: &QueryGraph,
    store: &GraphStore,
    config: &EngineConfig,
    hooks: SearchHooks<'_>,
    sink: &mut dyn SolutionSink,
) -> Result<EngineStats, EngineError> {
    let mut stats = EngineStats::default();
    let Some(matcher) = Matcher::new(query, store, *config, hooks)? else {
        return Ok(stats);
    };
    let mut state = matcher.new_state();
    matcher.run(&matcher.starts, None, &mut state, sink, &mut stats);
    Ok(stats)
}

/// Collects all matches, sorted.
pub fn collect_sorted(
    query: &QueryGraph,
    store: &GraphStore,
    config: &EngineConfig,
) -> Result<Vec<Solution>, EngineError> {
    let mut out: Vec<Solution> = Vec::new();
    execute(query, store, config, &mut out)?;
    out.sort();
    Ok(out)
}
