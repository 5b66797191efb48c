//! Query-side transformation: a parsed group pattern becomes a [`QueryGraph`]
//! whose labels and ids are resolved against a transformed data graph.

use std::collections::HashMap;

use thiserror::Error;

use super::{DataGraph, EdgeLabelKey, TransformMode};
use crate::ingest::{Dictionary, Term, Vocabulary};
use crate::query::{GroupPattern, OptionalGroup, QueryEdge, QueryGraph, QueryVertex, TermPattern, TriplePattern};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("unsupported in {mode} mode: {what}")]
    Unsupported { mode: TransformMode, what: String },
    #[error("the required pattern has no triples")]
    EmptyPattern,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum VertexKey {
    Var(String),
    Const(Term),
}

impl VertexKey {
    fn of(p: &TermPattern) -> Self {
        match p {
            TermPattern::Variable(v) => VertexKey::Var(v.clone()),
            TermPattern::Constant(t) => VertexKey::Const(t.clone()),
        }
    }
}

enum Role {
    /// `s rdf:type C` folded into the subject's labels (type-aware mode).
    TypeLabel,
    Edge(Option<EdgeLabelKey>),
}

struct Resolver<'a> {
    mode: TransformMode,
    graph: &'a DataGraph,
    dictionary: &'a Dictionary,
    vocabulary: &'a Vocabulary,
}

impl Resolver<'_> {
    fn unsupported(&self, what: impl Into<String>) -> TransformError {
        TransformError::Unsupported {
            mode: self.mode,
            what: what.into(),
        }
    }

    fn role(&self, t: &TriplePattern) -> Result<Role, TransformError> {
        let pred = match &t.predicate {
            TermPattern::Variable(_) => return Ok(Role::Edge(None)),
            TermPattern::Constant(p) => p,
        };
        let is_type = self.vocabulary.is_type(pred);
        let is_subclass = self.vocabulary.is_subclass(pred);
        match self.mode {
            TransformMode::TypeAware if is_type => {
                if matches!(t.object, TermPattern::Variable(_)) {
                    return Err(self.unsupported("rdf:type pattern with a variable class"));
                }
                Ok(Role::TypeLabel)
            }
            TransformMode::TypeAware if is_subclass => Err(self.unsupported("rdf:subClassOf pattern")),
            _ if is_type => Ok(Role::Edge(Some(EdgeLabelKey::Type))),
            _ if is_subclass => Ok(Role::Edge(Some(EdgeLabelKey::SubClassOf))),
            _ => Ok(Role::Edge(self.dictionary.lookup(pred).map(EdgeLabelKey::Predicate))),
        }
    }

    /// Whether every constant in the triple exists in the data.
    fn resolvable(&self, t: &TriplePattern) -> Result<bool, TransformError> {
        let vertex_ok = |p: &TermPattern| match p {
            TermPattern::Variable(_) => true,
            TermPattern::Constant(c) => self.vertex_of(c).is_some(),
        };
        Ok(match self.role(t)? {
            Role::TypeLabel => {
                let TermPattern::Constant(class) = &t.object else {
                    unreachable!()
                };
                vertex_ok(&t.subject) && self.label_of(class).is_some()
            }
            Role::Edge(key) => {
                let label_ok = match (&t.predicate, key) {
                    (TermPattern::Variable(_), _) => true,
                    (_, Some(k)) => self.graph.maps().edge_label_of(k).is_some(),
                    (_, None) => false,
                };
                label_ok && vertex_ok(&t.subject) && vertex_ok(&t.object)
            }
        })
    }

    fn vertex_of(&self, term: &Term) -> Option<u32> {
        self.dictionary
            .lookup(term)
            .and_then(|id| self.graph.maps().vertex_of(id))
    }

    fn label_of(&self, term: &Term) -> Option<u32> {
        self.dictionary
            .lookup(term)
            .and_then(|id| self.graph.maps().label_of(id))
    }
}

/// Converts one UNION branch into a query graph for `graph`.
///
/// Type-aware mode folds `rdf:type` patterns into vertex label sets; direct
/// mode keeps them as edges and labels constant vertices with their own id.
/// A required constant missing from the data yields an unsatisfiable graph; a
/// missing constant inside an OPTIONAL block marks that block unsatisfiable.
pub fn transform_query(
    pattern: &GroupPattern,
    mode: TransformMode,
    graph: &DataGraph,
    dictionary: &Dictionary,
    vocabulary: &Vocabulary,
) -> Result<QueryGraph, TransformError> {
    assert_eq!(
        mode,
        graph.mode(),
        "query and data graph must use the same transformation"
    );
    if pattern.triples.is_empty() {
        return Err(TransformError::EmptyPattern);
    }
    let resolver = Resolver {
        mode,
        graph,
        dictionary,
        vocabulary,
    };

    let blocks = pattern.optional_blocks();
    // (group, triples) with the core first, then blocks in pre-order
    let mut scopes: Vec<(Option<usize>, &[TriplePattern])> = vec![(None, &pattern.triples)];
    scopes.extend(
        blocks
            .iter()
            .enumerate()
            .map(|(i, (_, g))| (Some(i), g.triples.as_slice())),
    );

    let mut groups: Vec<OptionalGroup> = blocks
        .iter()
        .map(|&(parent, _)| OptionalGroup {
            parent,
            satisfiable: true,
        })
        .collect();
    for &(group, triples) in &scopes {
        for t in triples {
            if !resolver.resolvable(t)? {
                match group {
                    None => return Ok(QueryGraph::empty_result()),
                    Some(g) => groups[g].satisfiable = false,
                }
            }
        }
    }
    for g in 0..groups.len() {
        if let Some(p) = groups[g].parent {
            if !groups[p].satisfiable {
                groups[g].satisfiable = false;
            }
        }
    }

    let mut query = QueryGraph {
        groups,
        ..QueryGraph::default()
    };
    let mut index: HashMap<VertexKey, usize> = HashMap::new();
    let mut vertex = |query: &mut QueryGraph, p: &TermPattern, group: Option<usize>| -> usize {
        *index.entry(VertexKey::of(p)).or_insert_with(|| {
            let (name, variable, labels, bound) = match p {
                TermPattern::Variable(v) => {
                    let name = if v.starts_with("_:") {
                        v.clone()
                    } else {
                        format!("?{v}")
                    };
                    (name, Some(v.clone()), Vec::new(), None)
                }
                TermPattern::Constant(t) => {
                    let v = resolver.vertex_of(t).expect("checked resolvable");
                    match mode {
                        TransformMode::Direct => (t.to_string(), None, vec![v], None),
                        TransformMode::TypeAware => (t.to_string(), None, Vec::new(), Some(v)),
                    }
                }
            };
            query.vertices.push(QueryVertex {
                name,
                variable,
                labels,
                bound,
                group,
            });
            query.vertices.len() - 1
        })
    };

    for &(group, triples) in &scopes {
        if group.is_some_and(|g| !query.groups[g].satisfiable) {
            continue;
        }
        for t in triples {
            match resolver.role(t)? {
                Role::TypeLabel => {
                    let s = vertex(&mut query, &t.subject, group);
                    if query.vertices[s].group != group {
                        return Err(
                            resolver.unsupported("rdf:type pattern on a vertex introduced outside its OPTIONAL block")
                        );
                    }
                    let TermPattern::Constant(class) = &t.object else {
                        unreachable!()
                    };
                    let label = resolver.label_of(class).expect("checked resolvable");
                    let labels = &mut query.vertices[s].labels;
                    if let Err(pos) = labels.binary_search(&label) {
                        labels.insert(pos, label);
                    }
                }
                Role::Edge(key) => {
                    let s = vertex(&mut query, &t.subject, group);
                    let o = vertex(&mut query, &t.object, group);
                    let (label, variable) = match &t.predicate {
                        TermPattern::Variable(v) => (None, Some(v.clone())),
                        TermPattern::Constant(_) => (key.and_then(|k| graph.maps().edge_label_of(k)), None),
                    };
                    query.edges.push(QueryEdge {
                        source: s,
                        target: o,
                        label,
                        variable,
                        group,
                    });
                }
            }
        }
    }

    for e in &query.edges {
        if let Some(pv) = &e.variable {
            if query.vertices.iter().any(|v| v.variable.as_ref() == Some(pv)) {
                return Err(
                    resolver.unsupported(format!("variable ?{pv} used both as predicate and as subject/object"))
                );
            }
        }
    }
    Ok(query)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{encode, parse_ntriples};
    use crate::query::parse_query;
    use crate::transform::{direct_transform, type_aware_transform};

    const UNIVERSITY: &str = include_str!("../../tests/data/university.nt");
    const TRIANGLE: &str = "SELECT ?X, ?Y, ?Z WHERE
{?X rdf:type Student .
 ?Y rdf:type University .
 ?Z rdf:type Department .
 ?X undergradDegreeFrom ?Y .
 ?X memberOf ?Z .
 ?Z subOrganizationOf ?Y.}";

    fn setup(mode: TransformMode) -> (Dictionary, DataGraph) {
        let mut d = Dictionary::new();
        let set = encode(&mut d, &Vocabulary::default(), &parse_ntriples(UNIVERSITY).unwrap());
        let g = match mode {
            TransformMode::Direct => direct_transform(&set),
            TransformMode::TypeAware => type_aware_transform(&set),
        };
        (d, g)
    }

    fn transform(text: &str, mode: TransformMode) -> Result<QueryGraph, TransformError> {
        let (d, g) = setup(mode);
        let q = parse_query(text).unwrap();
        transform_query(&q.branches[0], mode, &g, &d, &Vocabulary::default())
    }

    #[test]
    fn type_aware_triangle() {
        let q = transform(TRIANGLE, TransformMode::TypeAware).unwrap();
        assert_eq!(q.vertex_count(), 3);
        assert_eq!(q.edge_count(), 3);
        // labels: GraduateStudent=0, Student=1, University=2, Department=3
        let labels: Vec<_> = q.vertices.iter().map(|v| v.labels.clone()).collect();
        assert_eq!(labels, vec![vec![1], vec![2], vec![3]]);
        let edges: Vec<_> = q.edges.iter().map(|e| (e.source, e.target, e.label)).collect();
        assert_eq!(edges, vec![(0, 1, Some(0)), (0, 2, Some(1)), (2, 1, Some(2))]);
    }

    #[test]
    fn direct_keeps_type_edges() {
        let q = transform(TRIANGLE, TransformMode::Direct).unwrap();
        assert_eq!(q.vertex_count(), 6);
        assert_eq!(q.edge_count(), 6);
        let type_edges = q.edges.iter().filter(|e| e.label == Some(0)).count();
        assert_eq!(type_edges, 3);
        let constants = q.vertices.iter().filter(|v| v.variable.is_none()).count();
        assert_eq!(constants, 3);
        assert!(q
            .vertices
            .iter()
            .filter(|v| v.variable.is_none())
            .all(|v| v.labels.len() == 1));
    }

    #[test]
    fn single_triple_with_blank_labels() {
        let q = transform("SELECT * WHERE { ?x <memberOf> ?y }", TransformMode::TypeAware).unwrap();
        assert_eq!(q.vertex_count(), 2);
        assert!(q.vertices.iter().all(|v| v.labels.is_empty() && v.bound.is_none()));
        assert_eq!(q.edges[0].label, Some(1));
    }

    #[test]
    fn predicate_variable_gives_blank_edge_label() {
        let q = transform("SELECT * WHERE { ?x ?p ?y }", TransformMode::TypeAware).unwrap();
        assert_eq!(q.edges[0].label, None);
        assert_eq!(q.edges[0].variable.as_deref(), Some("p"));
    }

    #[test]
    fn unknown_constants_make_the_query_unsatisfiable() {
        for text in [
            "SELECT * WHERE { ?x a <Nope> }",
            "SELECT * WHERE { ?x <nope> ?y }",
            "SELECT * WHERE { <nobody> <memberOf> ?y }",
        ] {
            assert!(
                transform(text, TransformMode::TypeAware).unwrap().unsatisfiable,
                "{text}"
            );
        }
    }

    #[test]
    fn constants_carry_ids_in_type_aware_mode() {
        let q = transform(
            "SELECT * WHERE { <student1> <memberOf> ?d . <student1> a <Student> }",
            TransformMode::TypeAware,
        )
        .unwrap();
        assert_eq!(q.vertices[0].bound, Some(0));
        assert_eq!(q.vertices[0].labels, vec![1]);
    }

    #[test]
    fn optional_block_with_unknown_constant_is_marked() {
        let q = transform(
            "SELECT * WHERE { ?x <memberOf> ?d OPTIONAL { ?x <nope> ?z } OPTIONAL { ?x <telephone> ?t } }",
            TransformMode::TypeAware,
        )
        .unwrap();
        assert!(!q.groups[0].satisfiable);
        assert!(q.groups[1].satisfiable);
        assert_eq!(q.vertex_count(), 3);
        assert_eq!(q.vertices[2].group, Some(1));
    }

    #[test]
    fn unsupported_patterns() {
        assert!(transform("SELECT * WHERE { ?x a ?c }", TransformMode::TypeAware).is_err());
        assert!(transform("SELECT * WHERE { ?x a ?c }", TransformMode::Direct).is_ok());
        assert!(transform("SELECT * WHERE { ?a rdfs:subClassOf ?b }", TransformMode::TypeAware).is_err());
        assert!(transform("SELECT * WHERE { ?x ?p ?y . ?p <memberOf> ?z }", TransformMode::Direct).is_err());
    }
}
