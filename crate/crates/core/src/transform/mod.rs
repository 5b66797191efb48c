//! RDF triple set to labeled graph conversion.
//!
//! Two modes are supported. The direct mode keeps the RDF topology: every
//! subject and object is a vertex labeled with itself and every predicate is an
//! edge label. The type-aware mode folds `rdf:type` / `rdf:subClassOf` triples
//! into per-vertex label sets, so type objects stop being vertices.

mod query;

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::io::{self, Write};

use crate::csr::Csr;
use crate::ingest::{Dictionary, TermId, TripleSet, RDFS_SUBCLASS_OF, RDF_TYPE};

pub use query::{transform_query, TransformError};

pub type VertexId = u32;
pub type LabelId = u32;
pub type EdgeLabelId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformMode {
    Direct,
    TypeAware,
}

impl fmt::Display for TransformMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransformMode::Direct => "direct",
            TransformMode::TypeAware => "type-aware",
        })
    }
}

/// What an edge label stands for. Type and subclass predicates only become
/// edge labels in direct mode, and all their aliases share one label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeLabelKey {
    Type,
    SubClassOf,
    Predicate(TermId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub source: VertexId,
    pub label: EdgeLabelId,
    pub target: VertexId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransformWarning {
    /// The subclass hierarchy contains a cycle through this class term.
    SubclassCycle(TermId),
}

/// Vertex, label and edge-label mapping tables of a transformed graph.
#[derive(Debug, Clone, Default)]
pub struct GraphMaps {
    vertex_terms: Vec<TermId>,
    term_vertex: HashMap<TermId, VertexId>,
    label_terms: Vec<TermId>,
    term_label: HashMap<TermId, LabelId>,
    edge_label_keys: Vec<EdgeLabelKey>,
    edge_label_ids: HashMap<EdgeLabelKey, EdgeLabelId>,
}

impl GraphMaps {
    pub fn vertex_of(&self, term: TermId) -> Option<VertexId> {
        self.term_vertex.get(&term).copied()
    }

    pub fn term_of_vertex(&self, v: VertexId) -> TermId {
        self.vertex_terms[v as usize]
    }

    pub fn label_of(&self, term: TermId) -> Option<LabelId> {
        self.term_label.get(&term).copied()
    }

    pub fn term_of_label(&self, l: LabelId) -> TermId {
        self.label_terms[l as usize]
    }

    pub fn edge_label_of(&self, key: EdgeLabelKey) -> Option<EdgeLabelId> {
        self.edge_label_ids.get(&key).copied()
    }

    pub fn edge_label_key(&self, el: EdgeLabelId) -> EdgeLabelKey {
        self.edge_label_keys[el as usize]
    }

    pub fn edge_label_count(&self) -> usize {
        self.edge_label_keys.len()
    }

    pub fn label_count(&self) -> usize {
        self.label_terms.len()
    }
}

/// An immutable labeled data graph.
#[derive(Debug, Clone)]
pub struct DataGraph {
    mode: TransformMode,
    maps: GraphMaps,
    labels: Csr<LabelId>,
    simple_labels: Csr<LabelId>,
    edges: Vec<Edge>,
    warnings: Vec<TransformWarning>,
}

impl DataGraph {
    pub fn mode(&self) -> TransformMode {
        self.mode
    }

    pub fn maps(&self) -> &GraphMaps {
        &self.maps
    }

    pub fn vertex_count(&self) -> usize {
        self.maps.vertex_terms.len()
    }

    pub fn label_count(&self) -> usize {
        self.maps.label_terms.len()
    }

    pub fn edge_label_count(&self) -> usize {
        self.maps.edge_label_keys.len()
    }

    /// Edges sorted by (source, label, target), without duplicates.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Sorted label set L(v), closed over the subclass hierarchy.
    pub fn labels(&self, v: VertexId) -> &[LabelId] {
        self.labels.row(v as usize)
    }

    /// Labels from directly asserted types only.
    pub fn simple_labels(&self, v: VertexId) -> &[LabelId] {
        self.simple_labels.row(v as usize)
    }

    pub fn warnings(&self) -> &[TransformWarning] {
        &self.warnings
    }

    pub fn size_stats(&self) -> (usize, usize) {
        (self.vertex_count(), self.edges.len())
    }

    /// Builds a graph from explicit parts. Label ids must be below
    /// `label_count` and edge endpoints below the vertex count; mapping tables
    /// use synthetic term ids equal to the vertex and label ids.
    pub fn from_parts(
        labels: Vec<Vec<LabelId>>,
        label_count: usize,
        edge_label_count: usize,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Self {
        let n = labels.len();
        let maps = GraphMaps {
            vertex_terms: (0..n as u32).collect(),
            term_vertex: (0..n as u32).map(|v| (v, v)).collect(),
            label_terms: (0..label_count as u32).collect(),
            term_label: (0..label_count as u32).map(|l| (l, l)).collect(),
            edge_label_keys: (0..edge_label_count as u32).map(EdgeLabelKey::Predicate).collect(),
            edge_label_ids: (0..edge_label_count as u32)
                .map(|l| (EdgeLabelKey::Predicate(l), l))
                .collect(),
        };
        let labels: Vec<Vec<LabelId>> = labels
            .into_iter()
            .map(|mut ls| {
                ls.sort_unstable();
                ls.dedup();
                assert!(ls.iter().all(|&l| (l as usize) < label_count), "label id out of range");
                ls
            })
            .collect();
        let mut edges: Vec<Edge> = edges.into_iter().collect();
        assert!(
            edges
                .iter()
                .all(|e| (e.source as usize) < n && (e.target as usize) < n && (e.label as usize) < edge_label_count),
            "edge out of range"
        );
        edges.sort_unstable();
        edges.dedup();
        let labels = Csr::from_rows(labels);
        DataGraph {
            mode: TransformMode::TypeAware,
            maps,
            simple_labels: labels.clone(),
            labels,
            edges,
            warnings: Vec::new(),
        }
    }

    /// Writes the vertex, label and edge-label tables as TSV sections.
    pub fn dump_maps(&self, dictionary: &Dictionary, out: &mut dyn Write) -> io::Result<()> {
        let term = |id: TermId| {
            dictionary
                .decode(id)
                .map(|t| t.to_string())
                .unwrap_or_else(|| format!("#{id}"))
        };
        writeln!(out, "# vertices ({})", self.mode)?;
        writeln!(out, "term\tvertex")?;
        for (v, &t) in self.maps.vertex_terms.iter().enumerate() {
            writeln!(out, "{}\t{}", term(t), v)?;
        }
        writeln!(out, "# vertex labels")?;
        writeln!(out, "term\tlabel")?;
        if self.mode == TransformMode::TypeAware {
            for (l, &t) in self.maps.label_terms.iter().enumerate() {
                writeln!(out, "{}\t{}", term(t), l)?;
            }
        }
        writeln!(out, "# edge labels")?;
        writeln!(out, "predicate\tedge_label")?;
        for (el, key) in self.maps.edge_label_keys.iter().enumerate() {
            let name = match *key {
                EdgeLabelKey::Type => format!("<{RDF_TYPE}>"),
                EdgeLabelKey::SubClassOf => format!("<{RDFS_SUBCLASS_OF}>"),
                EdgeLabelKey::Predicate(t) => term(t),
            };
            writeln!(out, "{name}\t{el}")?;
        }
        Ok(())
    }
}

fn index_by_term(mut terms: Vec<TermId>) -> (Vec<TermId>, HashMap<TermId, u32>) {
    terms.sort_unstable();
    terms.dedup();
    let index = terms.iter().enumerate().map(|(i, &t)| (t, i as u32)).collect();
    (terms, index)
}

/// Direct transformation: all three subsets become edges and every vertex is
/// labeled with its own id. Vertex ids follow dictionary order; type and
/// subclass edge labels come first, then predicates in dictionary order.
pub fn direct_transform(triples: &TripleSet) -> DataGraph {
    let mut vertex_terms = Vec::new();
    for &(s, _, o) in &triples.plain {
        vertex_terms.extend([s, o]);
    }
    for &(s, o) in triples.types.iter().chain(&triples.subclasses) {
        vertex_terms.extend([s, o]);
    }
    let (vertex_terms, term_vertex) = index_by_term(vertex_terms);

    let mut edge_label_keys = Vec::new();
    if !triples.types.is_empty() {
        edge_label_keys.push(EdgeLabelKey::Type);
    }
    if !triples.subclasses.is_empty() {
        edge_label_keys.push(EdgeLabelKey::SubClassOf);
    }
    let (predicates, _) = index_by_term(triples.plain.iter().map(|t| t.1).collect());
    edge_label_keys.extend(predicates.into_iter().map(EdgeLabelKey::Predicate));
    let edge_label_ids: HashMap<_, _> = edge_label_keys
        .iter()
        .enumerate()
        .map(|(i, &k)| (k, i as EdgeLabelId))
        .collect();

    let vid = |t: TermId| term_vertex[&t];
    let mut edges = Vec::with_capacity(triples.len());
    for &(s, p, o) in &triples.plain {
        edges.push(Edge {
            source: vid(s),
            label: edge_label_ids[&EdgeLabelKey::Predicate(p)],
            target: vid(o),
        });
    }
    for (list, key) in [
        (&triples.types, EdgeLabelKey::Type),
        (&triples.subclasses, EdgeLabelKey::SubClassOf),
    ] {
        for &(s, o) in list {
            edges.push(Edge {
                source: vid(s),
                label: edge_label_ids[&key],
                target: vid(o),
            });
        }
    }
    edges.sort_unstable();
    edges.dedup();

    let n = vertex_terms.len();
    let labels = Csr::from_rows((0..n as u32).map(|v| [v]));
    DataGraph {
        mode: TransformMode::Direct,
        maps: GraphMaps {
            label_terms: vertex_terms.clone(),
            term_label: term_vertex.clone(),
            vertex_terms,
            term_vertex,
            edge_label_keys,
            edge_label_ids,
        },
        simple_labels: labels.clone(),
        labels,
        edges,
        warnings: Vec::new(),
    }
}

/// Type-aware transformation.
///
/// Vertices are created for subjects and objects of plain triples and for
/// subjects of type triples; edges only for plain triples. A vertex's label set
/// holds every class reachable through one type edge followed by any number of
/// subclass edges. Subclass cycles are tolerated and reported as warnings.
pub fn type_aware_transform(triples: &TripleSet) -> DataGraph {
    let mut vertex_terms = Vec::new();
    for &(s, _, o) in &triples.plain {
        vertex_terms.extend([s, o]);
    }
    vertex_terms.extend(triples.types.iter().map(|t| t.0));
    let (vertex_terms, term_vertex) = index_by_term(vertex_terms);

    let mut label_terms: Vec<TermId> = triples.types.iter().map(|t| t.1).collect();
    label_terms.extend(triples.subclasses.iter().map(|t| t.1));
    let (label_terms, term_label) = index_by_term(label_terms);

    let (predicates, predicate_index) = index_by_term(triples.plain.iter().map(|t| t.1).collect());
    let edge_label_keys: Vec<_> = predicates.iter().map(|&p| EdgeLabelKey::Predicate(p)).collect();
    let edge_label_ids = edge_label_keys
        .iter()
        .enumerate()
        .map(|(i, &k)| (k, i as EdgeLabelId))
        .collect();

    let mut edges: Vec<Edge> = triples
        .plain
        .iter()
        .map(|&(s, p, o)| Edge {
            source: term_vertex[&s],
            label: predicate_index[&p],
            target: term_vertex[&o],
        })
        .collect();
    edges.sort_unstable();
    edges.dedup();

    let mut superclasses: HashMap<TermId, Vec<TermId>> = HashMap::new();
    for &(sub, sup) in &triples.subclasses {
        superclasses.entry(sub).or_default().push(sup);
    }
    let mut closure = ClassClosure {
        superclasses: &superclasses,
        term_label: &term_label,
        cache: HashMap::new(),
    };

    let n = vertex_terms.len();
    let mut direct_types: Vec<Vec<TermId>> = vec![Vec::new(); n];
    for &(s, o) in &triples.types {
        direct_types[term_vertex[&s] as usize].push(o);
    }
    let mut labels = Vec::with_capacity(n);
    let mut simple = Vec::with_capacity(n);
    for types in &direct_types {
        let mut ls: Vec<LabelId> = Vec::new();
        for &t in types {
            ls.extend_from_slice(closure.labels(t));
        }
        ls.sort_unstable();
        ls.dedup();
        labels.push(ls);
        let mut ss: Vec<LabelId> = types.iter().map(|t| term_label[t]).collect();
        ss.sort_unstable();
        ss.dedup();
        simple.push(ss);
    }

    let warnings = subclass_cycles(&superclasses)
        .into_iter()
        .map(TransformWarning::SubclassCycle)
        .collect();

    DataGraph {
        mode: TransformMode::TypeAware,
        maps: GraphMaps {
            vertex_terms,
            term_vertex,
            label_terms,
            term_label,
            edge_label_keys,
            edge_label_ids,
        },
        labels: Csr::from_rows(labels),
        simple_labels: Csr::from_rows(simple),
        edges,
        warnings,
    }
}

pub fn transform(triples: &TripleSet, mode: TransformMode) -> DataGraph {
    match mode {
        TransformMode::Direct => direct_transform(triples),
        TransformMode::TypeAware => type_aware_transform(triples),
    }
}

struct ClassClosure<'a> {
    superclasses: &'a HashMap<TermId, Vec<TermId>>,
    term_label: &'a HashMap<TermId, LabelId>,
    cache: HashMap<TermId, Vec<LabelId>>,
}

impl ClassClosure<'_> {
    /// Labels of `class` and everything reachable over subclass edges.
    fn labels(&mut self, class: TermId) -> &[LabelId] {
        if !self.cache.contains_key(&class) {
            let mut seen = HashSet::from([class]);
            let mut queue = VecDeque::from([class]);
            while let Some(c) = queue.pop_front() {
                for &sup in self.superclasses.get(&c).map(Vec::as_slice).unwrap_or_default() {
                    if seen.insert(sup) {
                        queue.push_back(sup);
                    }
                }
            }
            let mut ls: Vec<LabelId> = seen.iter().filter_map(|t| self.term_label.get(t).copied()).collect();
            ls.sort_unstable();
            self.cache.insert(class, ls);
        }
        &self.cache[&class]
    }
}

/// One representative class per subclass cycle, in ascending term order.
fn subclass_cycles(superclasses: &HashMap<TermId, Vec<TermId>>) -> Vec<TermId> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut marks: HashMap<TermId, Mark> = HashMap::new();
    let mut found = Vec::new();
    let mut roots: Vec<TermId> = superclasses.keys().copied().collect();
    roots.sort_unstable();
    for root in roots {
        if marks.contains_key(&root) {
            continue;
        }
        // iterative DFS: (node, next child index)
        let mut stack = vec![(root, 0usize)];
        marks.insert(root, Mark::Open);
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            let children = superclasses.get(&node).map(Vec::as_slice).unwrap_or_default();
            if let Some(&child) = children.get(*next) {
                *next += 1;
                match marks.get(&child) {
                    None => {
                        marks.insert(child, Mark::Open);
                        stack.push((child, 0));
                    }
                    Some(Mark::Open) => found.push(child),
                    Some(Mark::Done) => {}
                }
            } else {
                marks.insert(node, Mark::Done);
                stack.pop();
            }
        }
    }
    found.sort_unstable();
    found.dedup();
    found
}
