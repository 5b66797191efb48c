//! N-Triples ingestion: parsing, dictionary encoding and the split of the
//! triple set into plain, `rdf:type` and `rdf:subClassOf` subsets.

mod ntriples;

use std::collections::{HashMap, HashSet};

pub use ntriples::{parse_line, parse_ntriples, parse_ntriples_lenient, RawTriple, SyntaxError, Term, TermKind};

pub type TermId = u32;

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";

/// Dense bijection between terms and ids, assigned in first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dictionary {
    ids: HashMap<Term, TermId>,
    terms: Vec<Term>,
}

impl Dictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn encode(&mut self, term: &Term) -> TermId {
        if let Some(&id) = self.ids.get(term) {
            return id;
        }
        let id = TermId::try_from(self.terms.len()).expect("dictionary exceeds u32 ids");
        self.ids.insert(term.clone(), id);
        self.terms.push(term.clone());
        id
    }

    pub fn lookup(&self, term: &Term) -> Option<TermId> {
        self.ids.get(term).copied()
    }

    pub fn decode(&self, id: TermId) -> Option<&Term> {
        self.terms.get(id as usize)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }
}

/// Predicate IRIs treated as `rdf:type` and `rdf:subClassOf`.
///
/// The full RDF/RDFS IRIs are always recognized. The default aliases cover the
/// prefixed spellings (`rdf:type`, `rdf:subClassOf`, `rdfs:subClassOf`) that
/// hand-written fixtures tend to use inside angle brackets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    type_predicates: HashSet<String>,
    subclass_predicates: HashSet<String>,
}

impl Vocabulary {
    /// Only the full namespace IRIs, no aliases.
    pub fn strict() -> Self {
        Vocabulary {
            type_predicates: [RDF_TYPE.to_string()].into(),
            subclass_predicates: [RDFS_SUBCLASS_OF.to_string()].into(),
        }
    }

    pub fn with_type_alias(mut self, alias: impl Into<String>) -> Self {
        self.type_predicates.insert(alias.into());
        self
    }

    pub fn with_subclass_alias(mut self, alias: impl Into<String>) -> Self {
        self.subclass_predicates.insert(alias.into());
        self
    }

    pub fn is_type(&self, term: &Term) -> bool {
        term.kind == TermKind::Iri && self.type_predicates.contains(&term.lexical)
    }

    pub fn is_subclass(&self, term: &Term) -> bool {
        term.kind == TermKind::Iri && self.subclass_predicates.contains(&term.lexical)
    }
}

impl Default for Vocabulary {
    fn default() -> Self {
        Vocabulary::strict()
            .with_type_alias("rdf:type")
            .with_subclass_alias("rdf:subClassOf")
            .with_subclass_alias("rdfs:subClassOf")
    }
}

/// Dictionary-encoded triples split by predicate role.
///
/// Each subset is duplicate-free and keeps first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TripleSet {
    /// (subject, predicate, object) for every predicate other than type/subclass.
    pub plain: Vec<(TermId, TermId, TermId)>,
    /// (instance, class) pairs from `rdf:type` triples.
    pub types: Vec<(TermId, TermId)>,
    /// (subclass, superclass) pairs from `rdf:subClassOf` triples.
    pub subclasses: Vec<(TermId, TermId)>,
}

impl TripleSet {
    pub fn len(&self) -> usize {
        self.plain.len() + self.types.len() + self.subclasses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Encodes raw triples into `dictionary` and routes them by predicate.
/// The dictionary only grows; ids of already known terms are unchanged.
pub fn encode(dictionary: &mut Dictionary, vocabulary: &Vocabulary, triples: &[RawTriple]) -> TripleSet {
    let mut set = TripleSet::default();
    let mut seen_plain = HashSet::new();
    let mut seen_types = HashSet::new();
    let mut seen_subclasses = HashSet::new();
    for triple in triples {
        let s = dictionary.encode(&triple.subject);
        let p = dictionary.encode(&triple.predicate);
        let o = dictionary.encode(&triple.object);
        if vocabulary.is_type(&triple.predicate) {
            if seen_types.insert((s, o)) {
                set.types.push((s, o));
            }
        } else if vocabulary.is_subclass(&triple.predicate) {
            if seen_subclasses.insert((s, o)) {
                set.subclasses.push((s, o));
            }
        } else if seen_plain.insert((s, p, o)) {
            set.plain.push((s, p, o));
        }
    }
    set
}
