#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;
use rdfhom::engine::{collect_sorted, EngineConfig, MatchMode, Solution};
use rdfhom::graph_store::GraphStore;
use rdfhom::ingest::{parse_ntriples, RawTriple, Term, RDF_TYPE};
use rdfhom::query::QueryGraph;
use rdfhom::sparql_ext::{Database, ExecOptions};
use rdfhom::transform::{DataGraph, Edge, TransformMode};

pub const UNIVERSITY: &str = include_str!("../data/university.nt");

pub fn university(mode: TransformMode) -> Database {
    Database::from_ntriples(UNIVERSITY, mode).unwrap()
}

pub const TRIANGLE: &str = "SELECT ?X ?Y ?Z WHERE {
  ?X <rdf:type> <Student> . ?Y <rdf:type> <University> . ?Z <rdf:type> <Department> .
  ?X <undergradDegreeFrom> ?Y . ?X <memberOf> ?Z . ?Z <subOrganizationOf> ?Y . }";

/// Every combination of the four optimization toggles.
pub fn all_configs(mode: MatchMode) -> Vec<EngineConfig> {
    (0..16u8)
        .map(|bits| EngineConfig {
            mode,
            opt_int: bits & 1 != 0,
            use_nlf: bits & 2 != 0,
            use_deg: bits & 4 != 0,
            reuse_order: bits & 8 != 0,
            ..EngineConfig::default()
        })
        .collect()
}

pub fn solutions(query: &QueryGraph, graph: &DataGraph, config: &EngineConfig) -> Vec<Solution> {
    collect_sorted(query, &GraphStore::build(graph), config).unwrap()
}

fn edges(list: &[(u32, u32, u32)]) -> Vec<Edge> {
    list.iter()
        .map(|&(source, label, target)| Edge { source, label, target })
        .collect()
}

/// Five-vertex query with two a-edges into u1; the data has one extra
/// vertex reachable by b and c edges.
pub fn twin_cycle() -> (QueryGraph, DataGraph) {
    let mut q = QueryGraph::new();
    for _ in 0..5 {
        q.add_vertex(vec![], None);
    }
    for (s, t, l) in [(0, 1, 0), (0, 4, 1), (2, 1, 0), (2, 3, 0), (3, 4, 2)] {
        q.add_edge(s, t, Some(l));
    }
    let g = DataGraph::from_parts(
        vec![vec![]; 6],
        0,
        3,
        edges(&[
            (0, 0, 1),
            (0, 1, 4),
            (2, 0, 1),
            (2, 0, 3),
            (3, 2, 4),
            (2, 1, 5),
            (3, 2, 5),
        ]),
    );
    (q, g)
}

pub const A: u32 = 0;
pub const B: u32 = 1;
pub const C: u32 = 2;
pub const D: u32 = 3;

/// One A hub linked to 10000 B, 10 C and 5 D vertices; the query is a
/// 4-clique u0:A, u1:C, u2:B, u3:D with no answer.
pub fn clique_star() -> (QueryGraph, DataGraph) {
    let mut labels = vec![vec![A]];
    labels.extend(std::iter::repeat_n(vec![B], 10_000));
    labels.extend(std::iter::repeat_n(vec![C], 10));
    labels.extend(std::iter::repeat_n(vec![D], 5));
    let list: Vec<(u32, u32, u32)> = (1..labels.len() as u32).map(|v| (0, 0, v)).collect();
    let g = DataGraph::from_parts(labels, 4, 1, edges(&list));
    let mut q = QueryGraph::new();
    for l in [A, C, B, D] {
        q.add_vertex(vec![l], None);
    }
    for (s, t) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
        q.add_edge(s, t, Some(0));
    }
    (q, g)
}

/// Root v1 reaches v2 and 1000 X-vertices (v0, v3..=v1001); only v0 and
/// v1001 have a `1`-edge into v2.
pub fn join_fan() -> (QueryGraph, DataGraph) {
    const R: u32 = 0;
    const X: u32 = 1;
    const Y: u32 = 2;
    let mut labels = vec![vec![X], vec![R], vec![Y]];
    labels.extend(std::iter::repeat_n(vec![X], 999));
    let mut list = vec![(1, 0, 0), (1, 0, 2), (0, 1, 2), (1001, 1, 2)];
    list.extend((3..=1001).map(|v| (1, 0, v)));
    let g = DataGraph::from_parts(labels, 3, 2, edges(&list));
    let mut q = QueryGraph::new();
    q.add_vertex(vec![R], None);
    q.add_vertex(vec![X], None);
    q.add_vertex(vec![Y], None);
    q.add_edge(0, 1, Some(0));
    q.add_edge(0, 2, Some(0));
    q.add_edge(1, 2, Some(1));
    (q, g)
}

pub fn join_fan_candidates() -> Vec<u32> {
    std::iter::once(0).chain(3..=1001).collect()
}

/// A random labeled multigraph and a connected query over it. Unlabeled
/// query edges carry one of two predicate variables so that some share a
/// binding.
pub fn random_instance(rng: &mut StdRng) -> (QueryGraph, DataGraph) {
    let label_count = rng.gen_range(1..=4u32);
    let edge_label_count = rng.gen_range(1..=3u32);
    let n = rng.gen_range(1..=12u32);
    let labels: Vec<Vec<u32>> = (0..n)
        .map(|_| (0..label_count).filter(|_| rng.gen_bool(0.35)).collect())
        .collect();
    let m = rng.gen_range(0..=3 * n);
    let data_edges: Vec<Edge> = (0..m)
        .map(|_| Edge {
            source: rng.gen_range(0..n),
            label: rng.gen_range(0..edge_label_count),
            target: rng.gen_range(0..n),
        })
        .collect();
    let g = DataGraph::from_parts(labels, label_count as usize, edge_label_count as usize, data_edges);

    let mut q = QueryGraph::new();
    let k = rng.gen_range(1..=4usize);
    for _ in 0..k {
        let ls: Vec<u32> = (0..label_count).filter(|_| rng.gen_bool(0.15)).collect();
        let bound = rng.gen_bool(0.08).then(|| rng.gen_range(0..n));
        q.add_vertex(ls, bound);
    }
    let add = |q: &mut QueryGraph, a: usize, b: usize, rng: &mut StdRng| {
        let (s, t) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
        if rng.gen_bool(0.65) {
            q.add_edge(s, t, Some(rng.gen_range(0..edge_label_count)));
        } else {
            let e = q.add_edge(s, t, None);
            q.edges[e].variable = Some(if rng.gen_bool(0.5) { "p" } else { "q" }.to_string());
        }
    };
    for u in 1..k {
        let parent = rng.gen_range(0..u);
        add(&mut q, parent, u, rng);
    }
    for _ in 0..rng.gen_range(0..=2) {
        let a = rng.gen_range(0..k);
        let b = rng.gen_range(0..k);
        add(&mut q, a, b, rng);
    }
    (q, g)
}

/// Random N-Triples over a small vocabulary: nodes `n0..`, predicates
/// `p0..p2`, numeric literals and a few `rdf:type` triples.
pub fn random_ntriples(rng: &mut StdRng) -> String {
    let nodes = rng.gen_range(2..=8);
    let mut out = String::new();
    for _ in 0..rng.gen_range(1..=20) {
        let s = rng.gen_range(0..nodes);
        match rng.gen_range(0..10) {
            0 => out.push_str(&format!("<n{s}> <rdf:type> <T{}> .\n", rng.gen_range(0..2))),
            1 | 2 => out.push_str(&format!(
                "<n{s}> <p{}> \"{}\" .\n",
                rng.gen_range(0..3),
                rng.gen_range(0..5)
            )),
            _ => out.push_str(&format!(
                "<n{s}> <p{}> <n{}> .\n",
                rng.gen_range(0..3),
                rng.gen_range(0..nodes)
            )),
        }
    }
    out
}

/// A connected random basic graph pattern in SPARQL syntax. Vertex
/// variables are `?a..?d`; predicates are constants or `?p`/`?q`.
pub fn random_bgp(rng: &mut StdRng) -> String {
    let vars = ["?a", "?b", "?c", "?d"];
    let mut used = vec!["?a"];
    let mut triples = Vec::new();
    for i in 0..rng.gen_range(1..=3) {
        let anchor = *used.choose(rng).unwrap();
        let other = match rng.gen_range(0..6) {
            0 => format!("<n{}>", rng.gen_range(0..8)),
            1 => format!("\"{}\"", rng.gen_range(0..5)),
            _ => {
                let v = vars[rng.gen_range(0..vars.len())];
                if !used.contains(&v) {
                    used.push(v);
                }
                v.to_string()
            }
        };
        let p = match rng.gen_range(0..5) {
            0 => "?p".to_string(),
            1 if i > 0 => "?q".to_string(),
            _ => format!("<p{}>", rng.gen_range(0..3)),
        };
        if other.starts_with('"') || rng.gen_bool(0.5) {
            triples.push(format!("{anchor} {p} {other} ."));
        } else {
            triples.push(format!("{other} {p} {anchor} ."));
        }
    }
    format!("SELECT * WHERE {{ {} }}", triples.join(" "))
}

pub type Binding = BTreeMap<String, Term>;

/// Sorted query answers as variable-to-term maps with unbound variables
/// omitted.
pub fn answer(db: &Database, query: &str, options: &ExecOptions) -> Vec<Binding> {
    let r = db.query(query, options).unwrap_or_else(|e| panic!("{query}: {e}"));
    let names: Vec<String> = r
        .variables
        .iter()
        .map(|v| v.trim_start_matches('?').to_string())
        .collect();
    let mut rows: Vec<Binding> = r
        .decode(db)
        .into_iter()
        .map(|row| {
            names
                .iter()
                .zip(row)
                .filter_map(|(n, t)| t.map(|t| (n.clone(), t.clone())))
                .collect()
        })
        .collect();
    rows.sort();
    rows
}

#[derive(Debug, Clone)]
pub enum Slot {
    Var(String),
    Const(Term),
}

fn slot(token: &str) -> Slot {
    if let Some(v) = token.strip_prefix('?') {
        Slot::Var(v.to_string())
    } else if let Some(iri) = token.strip_prefix('<') {
        Slot::Const(Term::iri(iri.trim_end_matches('>')))
    } else {
        Slot::Const(Term::literal_lexical(token))
    }
}

/// Parses the patterns produced by [`random_bgp`].
pub fn bgp_patterns(query: &str) -> Vec<[Slot; 3]> {
    let body = query.split_once('{').unwrap().1.rsplit_once('}').unwrap().0;
    body.split(" .")
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let parts: Vec<&str> = t.split_whitespace().collect();
            [slot(parts[0]), slot(parts[1]), slot(parts[2])]
        })
        .collect()
}

/// The store reports the `rdf:type` alias under its full IRI.
fn canonical(p: &Term) -> Term {
    if p.lexical == "rdf:type" {
        Term::iri(RDF_TYPE)
    } else {
        p.clone()
    }
}

/// Nested-loop evaluation of a basic graph pattern directly over the
/// distinct triples, independent of the graph transformation.
pub fn nested_loop(triples: &[RawTriple], patterns: &[[Slot; 3]]) -> Vec<Binding> {
    let mut distinct: Vec<[Term; 3]> = triples
        .iter()
        .map(|t| [t.subject.clone(), canonical(&t.predicate), t.object.clone()])
        .collect();
    distinct.sort();
    distinct.dedup();
    let mut partial = vec![Binding::new()];
    for pattern in patterns {
        let mut next = Vec::new();
        for b in &partial {
            for t in &distinct {
                let mut ext = b.clone();
                let ok = pattern.iter().zip(t.iter()).all(|(s, term)| match s {
                    Slot::Const(c) => c == term,
                    Slot::Var(v) => match ext.get(v) {
                        Some(bound) => bound == term,
                        None => {
                            ext.insert(v.clone(), term.clone());
                            true
                        }
                    },
                });
                if ok {
                    next.push(ext);
                }
            }
        }
        partial = next;
    }
    partial.sort();
    partial
}

pub fn parse(text: &str) -> Vec<RawTriple> {
    parse_ntriples(text).unwrap()
}

/// A LUBM-shaped synthetic dataset. Every student is typed `Student`
/// directly so that direct and type-aware answers coincide; a third are
/// also typed `GraduateStudent`.
pub fn lubm_like(universities: usize, departments: usize, students: usize, seed: u64) -> Vec<RawTriple> {
    use rand::SeedableRng;
    let mut rng = StdRng::seed_from_u64(seed);
    let iri = |s: &str| Term::iri(s);
    let ty = iri("rdf:type");
    let mut out = Vec::new();
    let mut push = |s: &Term, p: &Term, o: Term| {
        out.push(RawTriple {
            subject: s.clone(),
            predicate: p.clone(),
            object: o,
            line: 0,
        })
    };
    let (member, degree, sub_org, phone, email, name) = (
        iri("memberOf"),
        iri("undergradDegreeFrom"),
        iri("subOrganizationOf"),
        iri("telephone"),
        iri("emailAddress"),
        iri("name"),
    );
    push(&iri("GraduateStudent"), &iri("rdf:subClassOf"), iri("Student"));
    for u in 0..universities {
        let univ = iri(&format!("u{u}"));
        push(&univ, &ty, iri("University"));
        push(&univ, &name, Term::literal(&format!("University{u}")));
        for d in 0..departments {
            let dept = iri(&format!("d{d}.u{u}"));
            push(&dept, &ty, iri("Department"));
            push(&dept, &sub_org, univ.clone());
            for s in 0..students {
                let st = iri(&format!("s{s}.d{d}.u{u}"));
                push(&st, &ty, iri("Student"));
                if s % 3 == 0 {
                    push(&st, &ty, iri("GraduateStudent"));
                }
                push(&st, &member, dept.clone());
                let from = if rng.gen_bool(0.1) {
                    u
                } else {
                    rng.gen_range(0..universities)
                };
                push(&st, &degree, iri(&format!("u{from}")));
                push(&st, &phone, Term::literal(&format!("{u}-{d}-{s}")));
                push(&st, &email, Term::literal(&format!("s{s}@d{d}.u{u}")));
            }
        }
    }
    out
}
