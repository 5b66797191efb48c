//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rdfhom::engine::join::is_joinable;
use rdfhom::engine::{choose_start_vertex, collect_sorted, EngineConfig, MatchMode, Matcher, SearchHooks, Solution};
use rdfhom::graph_store::{Direction, GraphStore};
use rdfhom::ingest::{Term, Vocabulary};
use rdfhom::oracle::{brute_homomorphisms, brute_isomorphisms};
use rdfhom::parallel::{parallel_execute, ParallelConfig, DEFAULT_CHUNK_SIZE};
use rdfhom::query::parse_query;
use rdfhom::sparql_ext::{Database, ExecOptions};
use rdfhom::transform::{DataGraph, Edge, TransformMode};

type Check = fn() -> String;

fn twin_cycle_semantics() -> String {
    let (q, g) = twin_cycle();
    let hom = solutions(&q, &g, &EngineConfig::default());
    let iso = solutions(&q, &g, &EngineConfig::isomorphism());
    assert_eq!(hom.len(), 3, "homomorphisms");
    assert_eq!(iso.len(), 1, "isomorphisms");
    assert_eq!(hom, brute_homomorphisms(&q, &g).unwrap());
    assert_eq!(iso, brute_isomorphisms(&q, &g).unwrap());
    format!("hom={} iso={}", hom.len(), iso.len())
}

fn transformation_sizes() -> String {
    let ta = university(TransformMode::TypeAware);
    let g = ta.graph();
    assert_eq!(g.size_stats(), (5, 5));
    assert_eq!(g.label_count(), 4);
    assert_eq!(g.edge_label_count(), 5);
    let term = ta.dictionary().lookup(&Term::iri("student1")).unwrap();
    let v = g.maps().vertex_of(term).unwrap();
    let mut labels: Vec<String> = g
        .labels(v)
        .iter()
        .map(|&l| {
            ta.dictionary()
                .decode(g.maps().term_of_label(l))
                .unwrap()
                .value()
                .into_owned()
        })
        .collect();
    labels.sort();
    assert_eq!(labels, ["GraduateStudent", "Student"]);
    let direct = university(TransformMode::Direct);
    assert_eq!(direct.graph().size_stats(), (9, 9));
    format!("type-aware (5,5) with L(student1)={labels:?}; direct (9,9)")
}

fn matching_order() -> String {
    let (q, g) = clique_star();
    let store = GraphStore::build(&g);
    let config = EngineConfig::default();
    assert_eq!(choose_start_vertex(&q, &store, &config), Some(0));
    let matcher = Matcher::new(&q, &store, config, SearchHooks::default())
        .unwrap()
        .unwrap();
    assert_eq!(matcher.start_candidates(), [0]);
    let region = matcher.explore(0).expect("non-empty region");
    let order = matcher.order(&region);
    let paths = order.paths().to_vec();
    assert_eq!(paths, vec![vec![0, 3], vec![0, 1], vec![0, 2]]);
    assert!(collect_sorted(&q, &store, &config).unwrap().is_empty());
    format!("start u0, paths {paths:?}, order {:?}", order.order())
}

fn oracle_equivalence() -> String {
    let mut rng = StdRng::seed_from_u64(0x5eed_0004);
    let mut with_vars = 0;
    let mut total = 0;
    for mode in [MatchMode::Homomorphism, MatchMode::Isomorphism] {
        for i in 0..200 {
            let (q, g) = random_instance(&mut rng);
            let config = EngineConfig {
                mode,
                ..EngineConfig::default()
            };
            let expected = match mode {
                MatchMode::Homomorphism => brute_homomorphisms(&q, &g),
                MatchMode::Isomorphism => brute_isomorphisms(&q, &g),
            }
            .unwrap();
            assert_eq!(solutions(&q, &g, &config), expected, "{mode:?} instance {i}");
            if q.edges.iter().any(|e| e.variable.is_some()) {
                with_vars += 1;
            }
            total += expected.len();
        }
    }
    format!("400 instances, {with_vars} with predicate variables, {total} solutions")
}

fn optimization_invariance() -> String {
    let mut checked = 0;
    let db = university(TransformMode::TypeAware);
    for mode in [MatchMode::Homomorphism, MatchMode::Isomorphism] {
        let reference = answer(&db, TRIANGLE, &ExecOptions::default());
        assert_eq!(reference.len(), 1);
        for config in all_configs(mode) {
            let options = ExecOptions {
                config,
                ..ExecOptions::default()
            };
            assert_eq!(answer(&db, TRIANGLE, &options), reference, "{config:?}");
            checked += 1;
        }
    }
    let mut rng = StdRng::seed_from_u64(0x5eed_0005);
    let mut instances: Vec<(_, _)> = vec![join_fan()];
    instances.extend((0..50).map(|_| random_instance(&mut rng)));
    for (i, (q, g)) in instances.iter().enumerate() {
        let store = GraphStore::build(g);
        for mode in [MatchMode::Homomorphism, MatchMode::Isomorphism] {
            let configs = all_configs(mode);
            let reference = collect_sorted(q, &store, &configs[0]).unwrap();
            if i == 0 {
                assert_eq!(reference.len(), 2);
            }
            for c in &configs[1..] {
                assert_eq!(collect_sorted(q, &store, c).unwrap(), reference, "instance {i} {c:?}");
            }
            checked += configs.len();
        }
    }
    format!("{checked} configuration runs over 52 inputs agree")
}

fn intersection_join() -> String {
    let (q, g) = join_fan();
    let store = GraphStore::build(&g);
    let adjacency = store.adjacent(2, Direction::Incoming, Some(1), &[1]);
    assert_eq!(&*adjacency, [0, 1001]);
    let candidates = join_fan_candidates();
    assert_eq!(candidates.len(), 1000);
    let (mut with_int, mut without) = (0u64, 0u64);
    let a = is_joinable(&candidates, &[&adjacency], true, &mut with_int);
    let b = is_joinable(&candidates, &[&adjacency], false, &mut without);
    assert_eq!(a, [0, 1001]);
    assert_eq!(b, [0, 1001]);
    assert!(with_int < without, "{with_int} >= {without}");
    let on = collect_sorted(&q, &store, &EngineConfig::default()).unwrap();
    let off = collect_sorted(
        &q,
        &store,
        &EngineConfig {
            opt_int: false,
            ..EngineConfig::default()
        },
    )
    .unwrap();
    assert_eq!(on, off);
    assert_eq!(on.len(), 2);
    format!("{{v0, v1001}} both ways; comparisons {with_int} with +INT vs {without} without")
}

fn parallel_determinism() -> String {
    let hubs = 10_000u32;
    let spokes = 2u32;
    let mut labels = vec![vec![0]; hubs as usize];
    labels.extend(std::iter::repeat_n(vec![1], (hubs * spokes) as usize));
    let edges = (0..hubs).flat_map(|h| {
        (0..spokes).map(move |s| Edge {
            source: h,
            label: 0,
            target: hubs + h * spokes + s,
        })
    });
    let g = DataGraph::from_parts(labels, 2, 1, edges);
    let store = GraphStore::build(&g);
    let mut q = rdfhom::query::QueryGraph::new();
    q.add_vertex(vec![0], None);
    q.add_vertex(vec![1], None);
    q.add_vertex(vec![1], None);
    q.add_edge(0, 1, Some(0));
    q.add_edge(0, 2, Some(0));
    let config = EngineConfig::default();
    let mut reference: Option<Vec<Solution>> = None;
    for workers in [1, 2, 4, 8] {
        let par = ParallelConfig {
            workers,
            chunk_size: DEFAULT_CHUNK_SIZE,
        };
        let (got, stats) = parallel_execute(&q, &store, &config, &par).unwrap();
        assert_eq!(stats.engine.start_vertices, hubs as usize);
        assert_eq!(stats.chunk_claims.len(), (hubs as usize).div_ceil(DEFAULT_CHUNK_SIZE));
        assert!(stats.chunk_claims.iter().all(|&c| c == 1), "{workers} workers");
        match &reference {
            None => reference = Some(got),
            Some(r) => assert_eq!(&got, r, "{workers} workers"),
        }
    }
    let n = reference.unwrap().len();
    assert_eq!(n, (hubs * spokes * spokes) as usize);
    format!("{n} solutions identical for 1/2/4/8 workers, every chunk claimed once")
}

const PRODUCT: &str = r#"<product1> <rdf:type> <Product> .
<product1> <price> "$100" .
<product1> <rating> "5" .
<product1> <rating> "1" .
"#;

const PRODUCT_QUERY: &str = "SELECT ?price ?rating ?homepage WHERE
{ <product1> <rdf:type> <Product> . <product1> <price> ?price .
  OPTIONAL { <product1> <rating> ?rating . <product1> <homepage> ?homepage . } }";

/// Products with numeric ratings and features, filtered by a cheap
/// selection and sometimes an expensive join condition.
fn product_catalog(rng: &mut StdRng) -> String {
    let mut out = String::new();
    for p in 0..rng.gen_range(3..=12) {
        out.push_str(&format!("<product{p}> <rdf:type> <Product> .\n"));
        out.push_str(&format!("<product{p}> <rating> \"{}\" .\n", rng.gen_range(1..=10)));
        out.push_str(&format!(
            "<product{p}> <producer> <producer{}> .\n",
            rng.gen_range(0..3)
        ));
        for _ in 0..rng.gen_range(0..3) {
            out.push_str(&format!("<product{p}> <feature> <feature{}> .\n", rng.gen_range(0..4)));
        }
    }
    out
}

fn product_query(rng: &mut StdRng) -> String {
    let cheap = match rng.gen_range(0..3) {
        0 => format!("FILTER(?r > {})", rng.gen_range(1..=10)),
        1 => format!("FILTER(?f = <feature{}>)", rng.gen_range(0..4)),
        _ => format!("FILTER(?m != <producer{}>)", rng.gen_range(0..3)),
    };
    let join = if rng.gen_bool(0.5) {
        "?other <producer> ?m . ?other <rating> ?r0 . FILTER(?r > ?r0)"
    } else {
        ""
    };
    format!(
        "SELECT ?product ?r WHERE {{ ?product <rdf:type> <Product> . ?product <rating> ?r . \
         ?product <feature> ?f . ?product <producer> ?m . {join} {cheap} }}"
    )
}

fn sparql_extensions() -> String {
    let db = Database::from_ntriples(PRODUCT, TransformMode::TypeAware).unwrap();
    let rows = answer(&db, PRODUCT_QUERY, &ExecOptions::default());
    assert_eq!(rows.len(), 1, "{rows:?}");
    let row = &rows[0];
    assert_eq!(
        row.get("price").map(|t| t.value().into_owned()),
        Some("$100".to_string())
    );
    assert!(row.get("rating").is_none() && row.get("homepage").is_none());

    let db = university(TransformMode::TypeAware);
    let single = answer(&db, "SELECT * WHERE { ?s ?p ?o }", &ExecOptions::default());
    let doubled = answer(
        &db,
        "SELECT * WHERE { { ?s ?p ?o } UNION { ?s ?p ?o } }",
        &ExecOptions::default(),
    );
    assert_eq!(doubled.len(), 2 * single.len());
    assert!(single.iter().all(|r| doubled.iter().filter(|d| *d == r).count() == 2));

    let mut rng = StdRng::seed_from_u64(0x5eed_0008);
    let (mut early_filters, mut rows_seen) = (0, 0);
    for _ in 0..50 {
        let data = product_catalog(&mut rng);
        let query = product_query(&mut rng);
        let db = Database::from_ntriples(&data, TransformMode::TypeAware).unwrap();
        let prepared = db.prepare(&parse_query(&query).unwrap()).unwrap();
        early_filters += prepared.branches.iter().map(|b| b.early_filter_count()).sum::<usize>();
        let early = answer(&db, &query, &ExecOptions::default());
        let late = answer(
            &db,
            &query,
            &ExecOptions {
                early_filters: false,
                ..ExecOptions::default()
            },
        );
        assert_eq!(early, late, "{query}");
        rows_seen += early.len();
    }
    assert!(early_filters > 0);
    format!(
        "optional row emitted once; UNION doubled {} rows; 50 filter instances agree ({early_filters} early filters, {rows_seen} rows)",
        single.len()
    )
}

fn transform_scale() -> String {
    let triples = lubm_like(20, 15, 625, 0x5eed_0009);
    let n = triples.len();
    assert!(n >= 900_000, "{n} triples");
    let mut measured = Vec::new();
    for mode in [TransformMode::TypeAware, TransformMode::Direct] {
        let db = Database::load(&triples, mode, Vocabulary::default());
        let prepared = db.prepare(&parse_query(TRIANGLE).unwrap()).unwrap();
        let mut best = Duration::MAX;
        let mut result = None;
        for _ in 0..3 {
            let start = Instant::now();
            let r = db.execute(&prepared, &ExecOptions::default()).unwrap();
            best = best.min(start.elapsed());
            result = Some(r);
        }
        let r = result.unwrap();
        measured.push((r.len(), r.stats.region_vertices, best));
    }
    let (ta, direct) = (measured[0], measured[1]);
    assert_eq!(ta.0, direct.0, "answers differ");
    assert!(ta.0 > 0);
    assert!(ta.1 < direct.1, "region vertices {} vs {}", ta.1, direct.1);
    assert!(ta.2 <= direct.2, "time {:?} vs {:?}", ta.2, direct.2);
    format!(
        "{n} triples, {} answers; region vertices {} type-aware vs {} direct; {:.1} ms vs {:.1} ms",
        ta.0,
        ta.1,
        direct.1,
        ta.2.as_secs_f64() * 1e3,
        direct.2.as_secs_f64() * 1e3
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Check, Duration); 9] = [
        ("twin-cycle semantics", twin_cycle_semantics, Duration::from_secs(1)),
        ("transformation sizes", transformation_sizes, Duration::from_secs(1)),
        ("matching order", matching_order, Duration::from_secs(5)),
        ("oracle equivalence", oracle_equivalence, Duration::from_secs(60)),
        (
            "optimization invariance",
            optimization_invariance,
            Duration::from_secs(30),
        ),
        ("intersection join", intersection_join, Duration::from_secs(1)),
        ("parallel determinism", parallel_determinism, Duration::from_secs(30)),
        ("sparql extensions", sparql_extensions, Duration::from_secs(10)),
        ("transform scale", transform_scale, Duration::from_secs(300)),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(detail) if elapsed <= *budget => (true, detail),
            Ok(detail) => (false, format!("{detail}; over budget {budget:?}")),
            Err(payload) => {
                let msg = payload
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, msg.replace('\n', " "))
            }
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {} {name}: {} ({:.2}s) {detail}",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
