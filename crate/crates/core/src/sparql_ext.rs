//! OPTIONAL, FILTER and UNION evaluation on top of the matcher, plus a
//! [`Database`] facade that loads N-Triples and answers SPARQL text.
//!
//! OPTIONAL vertices without joinable candidates are nulled during the search;
//! each solution is then qualified group by group (a group keeps its bindings
//! only if its parent group survived and all of its vertices, edges and
//! filters matched), and a qualified solution equal to the previously emitted
//! one is dropped. UNION concatenates branch results without removing
//! duplicates.

use std::collections::HashMap;
use std::io::{self, Write};

use thiserror::Error;

use crate::engine::{execute_with, EngineConfig, EngineError, EngineStats, SearchHooks, Solution, SolutionSink};
use crate::graph_store::GraphStore;
use crate::ingest::{
    encode, parse_ntriples, Dictionary, RawTriple, SyntaxError, Term, Vocabulary, RDFS_SUBCLASS_OF, RDF_TYPE,
};
use crate::parallel::{parallel_execute_with, ParallelConfig};
use crate::query::{parse_query, FilterExpr, GroupPattern, Query, QueryError, QueryGraph};
use crate::transform::{
    transform, transform_query, DataGraph, EdgeLabelId, EdgeLabelKey, TransformError, TransformMode, VertexId,
};

#[derive(Debug, Error)]
pub enum SparqlError {
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Binding {
    Vertex(VertexId),
    EdgeLabel(EdgeLabelId),
}

/// One output row; `None` is an unbound variable.
pub type Row = Vec<Option<Binding>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Slot {
    Vertex(usize),
    Edge(usize),
}

impl Slot {
    fn value(self, s: &Solution) -> Option<Binding> {
        match self {
            Slot::Vertex(u) => s.vertices[u].map(Binding::Vertex),
            Slot::Edge(e) => s.edge_labels[e].map(Binding::EdgeLabel),
        }
    }
}

/// One UNION branch ready for execution.
pub struct BranchPlan {
    graph: QueryGraph,
    slots: HashMap<String, Slot>,
    columns: Vec<Option<Slot>>,
    /// Single-variable filters evaluated on candidates of a required vertex.
    early: Vec<Vec<FilterExpr>>,
    /// Required-level filters evaluated on complete solutions.
    late: Vec<FilterExpr>,
    /// Filters of each OPTIONAL block, evaluated when qualifying it.
    group_filters: Vec<Vec<FilterExpr>>,
}

impl BranchPlan {
    pub fn graph(&self) -> &QueryGraph {
        &self.graph
    }

    /// Number of filters applied while candidates are accessed.
    pub fn early_filter_count(&self) -> usize {
        self.early.iter().map(Vec::len).sum()
    }

    fn lookup<'d>(&self, db: &'d Database, s: &Solution, name: &str) -> Option<&'d Term> {
        let slot = *self.slots.get(name)?;
        slot.value(s).map(|b| db.binding_term(b))
    }

    /// Nulls every OPTIONAL group that did not match completely.
    pub fn qualify(&self, db: &Database, s: &mut Solution) {
        let q = &self.graph;
        let mut satisfied = vec![false; q.groups.len()];
        for g in 0..q.groups.len() {
            let group = q.groups[g];
            let mut ok = group.satisfiable && group.parent.is_none_or(|p| satisfied[p]);
            ok = ok
                && q.vertices
                    .iter()
                    .enumerate()
                    .all(|(u, v)| v.group != Some(g) || s.vertices[u].is_some())
                && q.edges
                    .iter()
                    .enumerate()
                    .all(|(e, edge)| edge.group != Some(g) || s.edge_labels[e].is_some());
            if ok {
                let snapshot = s.clone();
                ok = self.group_filters[g]
                    .iter()
                    .all(|f| f.eval(&|name| self.lookup(db, &snapshot, name)));
            }
            satisfied[g] = ok;
            if !ok {
                for (u, v) in q.vertices.iter().enumerate() {
                    if v.group == Some(g) {
                        s.vertices[u] = None;
                    }
                }
                for (e, edge) in q.edges.iter().enumerate() {
                    if edge.group == Some(g) {
                        s.edge_labels[e] = None;
                    }
                }
            }
        }
    }

    fn passes_late(&self, db: &Database, s: &Solution) -> bool {
        self.late.iter().all(|f| f.eval(&|name| self.lookup(db, s, name)))
    }

    fn project(&self, s: &Solution) -> Row {
        self.columns.iter().map(|c| c.and_then(|slot| slot.value(s))).collect()
    }
}

/// Post-processing sink of one branch: qualification, late filters,
/// consecutive-duplicate removal and projection.
pub struct BranchSink<'a> {
    db: &'a Database,
    plan: &'a BranchPlan,
    previous: Option<Solution>,
    pub rows: Vec<Row>,
}

impl<'a> BranchSink<'a> {
    pub fn new(db: &'a Database, plan: &'a BranchPlan) -> Self {
        BranchSink {
            db,
            plan,
            previous: None,
            rows: Vec::new(),
        }
    }
}

impl SolutionSink for BranchSink<'_> {
    fn emit(&mut self, solution: &Solution) {
        let optional = self.plan.graph.has_optional();
        let mut s = solution.clone();
        if optional {
            self.plan.qualify(self.db, &mut s);
        }
        if !self.plan.passes_late(self.db, &s) {
            return;
        }
        if optional {
            if self.previous.as_ref() == Some(&s) {
                return;
            }
            self.rows.push(self.plan.project(&s));
            self.previous = Some(s);
        } else {
            self.rows.push(self.plan.project(&s));
        }
    }
}

pub struct PreparedQuery {
    pub variables: Vec<String>,
    pub branches: Vec<BranchPlan>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecOptions {
    pub config: EngineConfig,
    /// Run required-only branches in parallel; OPTIONAL branches always run
    /// on one thread.
    pub parallel: Option<ParallelConfig>,
    /// Apply cheap single-variable filters while candidates are accessed
    /// instead of on complete solutions.
    pub early_filters: bool,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions {
            config: EngineConfig::default(),
            parallel: None,
            early_filters: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResultSet {
    pub variables: Vec<String>,
    pub rows: Vec<Row>,
    pub stats: EngineStats,
}

impl ResultSet {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn sort(&mut self) {
        self.rows.sort();
    }

    /// Rows decoded into terms.
    pub fn decode<'d>(&self, db: &'d Database) -> Vec<Vec<Option<&'d Term>>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|b| b.map(|b| db.binding_term(b))).collect())
            .collect()
    }

    /// Header row of variable names, then one tab-separated row per result;
    /// unbound values print as `NULL`.
    pub fn write_tsv(&self, db: &Database, out: &mut dyn Write) -> io::Result<()> {
        let header: Vec<String> = self.variables.iter().map(|v| format!("?{v}")).collect();
        writeln!(out, "{}", header.join("\t"))?;
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|b| match b {
                    Some(b) => db.binding_term(*b).to_string(),
                    None => "NULL".to_string(),
                })
                .collect();
            writeln!(out, "{}", cells.join("\t"))?;
        }
        Ok(())
    }
}

/// A loaded and indexed RDF graph.
pub struct Database {
    dictionary: Dictionary,
    vocabulary: Vocabulary,
    graph: DataGraph,
    store: GraphStore,
    edge_label_terms: Vec<Term>,
}

impl Database {
    pub fn from_ntriples(text: &str, mode: TransformMode) -> Result<Self, SyntaxError> {
        Ok(Self::load(&parse_ntriples(text)?, mode, Vocabulary::default()))
    }

    pub fn load(triples: &[RawTriple], mode: TransformMode, vocabulary: Vocabulary) -> Self {
        let mut dictionary = Dictionary::new();
        let set = encode(&mut dictionary, &vocabulary, triples);
        let graph = transform(&set, mode);
        Self::from_graph(dictionary, vocabulary, graph)
    }

    pub fn from_graph(dictionary: Dictionary, vocabulary: Vocabulary, graph: DataGraph) -> Self {
        let store = GraphStore::build(&graph);
        let edge_label_terms = (0..graph.edge_label_count() as EdgeLabelId)
            .map(|el| match graph.maps().edge_label_key(el) {
                EdgeLabelKey::Type => Term::iri(RDF_TYPE),
                EdgeLabelKey::SubClassOf => Term::iri(RDFS_SUBCLASS_OF),
                EdgeLabelKey::Predicate(t) => dictionary.decode(t).expect("predicate term").clone(),
            })
            .collect();
        Database {
            dictionary,
            vocabulary,
            graph,
            store,
            edge_label_terms,
        }
    }

    pub fn mode(&self) -> TransformMode {
        self.graph.mode()
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dictionary
    }

    pub fn graph(&self) -> &DataGraph {
        &self.graph
    }

    pub fn store(&self) -> &GraphStore {
        &self.store
    }

    pub fn vertex_term(&self, v: VertexId) -> &Term {
        let id = self.graph.maps().term_of_vertex(v);
        self.dictionary.decode(id).expect("vertex term")
    }

    pub fn edge_label_term(&self, el: EdgeLabelId) -> &Term {
        &self.edge_label_terms[el as usize]
    }

    pub fn binding_term(&self, b: Binding) -> &Term {
        match b {
            Binding::Vertex(v) => self.vertex_term(v),
            Binding::EdgeLabel(el) => self.edge_label_term(el),
        }
    }

    pub fn prepare(&self, query: &Query) -> Result<PreparedQuery, SparqlError> {
        let variables = query.projected_variables();
        let branches = query
            .branches
            .iter()
            .map(|b| self.prepare_branch(b, &variables))
            .collect::<Result<_, _>>()?;
        Ok(PreparedQuery { variables, branches })
    }

    fn prepare_branch(&self, pattern: &GroupPattern, variables: &[String]) -> Result<BranchPlan, SparqlError> {
        let graph = transform_query(pattern, self.mode(), &self.graph, &self.dictionary, &self.vocabulary)?;
        let mut slots = HashMap::new();
        for (u, v) in graph.vertices.iter().enumerate() {
            if let Some(name) = &v.variable {
                slots.insert(name.clone(), Slot::Vertex(u));
            }
        }
        for (e, edge) in graph.edges.iter().enumerate() {
            if let Some(name) = &edge.variable {
                slots.entry(name.clone()).or_insert(Slot::Edge(e));
            }
        }
        let columns = variables.iter().map(|v| slots.get(v).copied()).collect();
        let mut early = vec![Vec::new(); graph.vertex_count()];
        let mut late = Vec::new();
        for expr in &pattern.filters {
            let f = FilterExpr::new(expr.clone());
            let target = match f.variables() {
                [one] if f.is_cheap() => match slots.get(one) {
                    Some(&Slot::Vertex(u)) if !graph.is_optional(u) => Some(u),
                    _ => None,
                },
                _ => None,
            };
            match target {
                Some(u) => early[u].push(f),
                None => late.push(f),
            }
        }
        let group_filters = pattern
            .optional_blocks()
            .iter()
            .map(|(_, g)| g.filters.iter().cloned().map(FilterExpr::new).collect())
            .collect();
        Ok(BranchPlan {
            graph,
            slots,
            columns,
            early,
            late,
            group_filters,
        })
    }

    pub fn execute(&self, prepared: &PreparedQuery, options: &ExecOptions) -> Result<ResultSet, SparqlError> {
        let mut result = ResultSet {
            variables: prepared.variables.clone(),
            ..ResultSet::default()
        };
        for plan in &prepared.branches {
            let (rows, stats) = self.execute_branch(plan, options)?;
            result.rows.extend(rows);
            result.stats.merge(&stats);
        }
        Ok(result)
    }

    fn execute_branch(&self, plan: &BranchPlan, options: &ExecOptions) -> Result<(Vec<Row>, EngineStats), SparqlError> {
        let plan_late;
        let plan = if options.early_filters {
            plan
        } else {
            plan_late = BranchPlan {
                graph: plan.graph.clone(),
                slots: plan.slots.clone(),
                columns: plan.columns.clone(),
                early: vec![Vec::new(); plan.early.len()],
                late: plan.early.iter().flatten().chain(&plan.late).cloned().collect(),
                group_filters: plan.group_filters.clone(),
            };
            &plan_late
        };
        let check = |u: usize, v: VertexId| {
            let filters = &plan.early[u];
            if filters.is_empty() {
                return true;
            }
            let term = self.vertex_term(v);
            filters.iter().all(|f| f.eval(&|_| Some(term)))
        };
        let hooks = SearchHooks {
            candidate: (plan.early_filter_count() > 0).then_some(&check as _),
        };
        match options.parallel {
            Some(par) if !plan.graph.has_optional() => {
                let (sinks, stats) =
                    parallel_execute_with(&plan.graph, &self.store, &options.config, hooks, &par, || {
                        BranchSink::new(self, plan)
                    })?;
                let mut rows: Vec<_> = sinks.into_iter().flat_map(|s| s.rows).collect();
                rows.sort();
                Ok((rows, stats.engine))
            }
            _ => {
                let mut sink = BranchSink::new(self, plan);
                let stats = execute_with(&plan.graph, &self.store, &options.config, hooks, &mut sink)?;
                Ok((sink.rows, stats))
            }
        }
    }

    /// Parses, prepares and executes `text`.
    pub fn query(&self, text: &str, options: &ExecOptions) -> Result<ResultSet, SparqlError> {
        let q = parse_query(text)?;
        let prepared = self.prepare(&q)?;
        self.execute(&prepared, options)
    }
}
