//! Command-line front end: load N-Triples, transform, index, and answer a
//! SPARQL query file.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};
use log::warn;
use rdfhom::engine::{EngineConfig, MatchMode, SolutionSink};
use rdfhom::ingest::{encode, parse_ntriples, parse_ntriples_lenient, Dictionary, RawTriple, Vocabulary};
use rdfhom::oracle::{brute_homomorphisms, brute_isomorphisms};
use rdfhom::parallel::{ParallelConfig, DEFAULT_CHUNK_SIZE};
use rdfhom::query::parse_query;
use rdfhom::sparql_ext::{BranchSink, Database, ExecOptions, ResultSet};
use rdfhom::transform::{transform, TransformMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformArg {
    Direct,
    TypeAware,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Hom,
    Iso,
}

#[derive(Debug, Parser)]
#[command(
    name = "rdfhom",
    version,
    about = "Answer SPARQL queries over N-Triples with homomorphism matching"
)]
pub struct Args {
    /// N-Triples file; repeat to load several.
    #[arg(long, required = true)]
    pub data: Vec<PathBuf>,
    /// SPARQL query file.
    #[arg(long)]
    pub query: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "type-aware")]
    pub transform: TransformArg,
    #[arg(long, value_enum, default_value = "hom")]
    pub mode: ModeArg,
    /// Comma-separated toggles: +int,-int,+nlf,-nlf,+deg,-deg,+reuse,-reuse.
    #[arg(long, allow_hyphen_values = true)]
    pub opt: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, default_value_t = DEFAULT_CHUNK_SIZE)]
    pub chunk_size: usize,
    /// Print only the number of solutions.
    #[arg(long)]
    pub count: bool,
    /// Print rows in canonical sorted order.
    #[arg(long)]
    pub sorted: bool,
    /// Print per-phase wall-clock milliseconds.
    #[arg(long)]
    pub timings: bool,
    /// Answer with the brute-force matcher instead of the engine.
    #[arg(long)]
    pub oracle: bool,
    /// Print vertex and edge counts of the transformed graph.
    #[arg(long)]
    pub stats: bool,
    /// Print the vertex, label and edge-label tables.
    #[arg(long)]
    pub dump_maps: bool,
    /// Skip malformed N-Triples lines instead of failing.
    #[arg(long)]
    pub skip_bad: bool,
}

/// Applies `--opt` toggles to `config`.
pub fn apply_opt(config: &mut EngineConfig, spec: &str) -> Result<()> {
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (on, name) = match item.split_at(1) {
            ("+", n) => (true, n),
            ("-", n) => (false, n),
            _ => bail!("optimization toggle {item:?} must start with + or -"),
        };
        match name.to_ascii_lowercase().as_str() {
            "int" => config.opt_int = on,
            "nlf" => config.use_nlf = on,
            "deg" => config.use_deg = on,
            "reuse" => config.reuse_order = on,
            _ => bail!("unknown optimization {name:?}"),
        }
    }
    Ok(())
}

struct Timings(Vec<(&'static str, f64)>);

impl Timings {
    fn time<T>(&mut self, phase: &'static str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.0.push((phase, start.elapsed().as_secs_f64() * 1000.0));
        out
    }
}

fn load(args: &Args, err: &mut dyn Write) -> Result<Vec<RawTriple>> {
    let mut triples = Vec::new();
    for path in &args.data {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        if args.skip_bad {
            let mut skipped = 0usize;
            triples.extend(parse_ntriples_lenient(&text, |e| {
                skipped += 1;
                warn!("{}: {e}", path.display());
            }));
            if skipped > 0 {
                writeln!(err, "{}: skipped {skipped} malformed line(s)", path.display())?;
            }
        } else {
            triples.extend(parse_ntriples(&text).with_context(|| format!("parsing {}", path.display()))?);
        }
    }
    Ok(triples)
}

fn run_args(args: &Args, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut config = EngineConfig {
        mode: match args.mode {
            ModeArg::Hom => MatchMode::Homomorphism,
            ModeArg::Iso => MatchMode::Isomorphism,
        },
        ..EngineConfig::default()
    };
    if let Some(spec) = &args.opt {
        apply_opt(&mut config, spec)?;
    }
    let mode = match args.transform {
        TransformArg::Direct => TransformMode::Direct,
        TransformArg::TypeAware => TransformMode::TypeAware,
    };
    if args.threads == 0 {
        bail!("--threads must be at least 1");
    }

    let mut t = Timings(Vec::new());
    let raw = load(args, err)?;
    let vocabulary = Vocabulary::default();
    let mut dictionary = Dictionary::new();
    let set = t.time("ingest", || encode(&mut dictionary, &vocabulary, &raw));
    drop(raw);
    let graph = t.time("transform", || transform(&set, mode));
    for w in graph.warnings() {
        writeln!(err, "warning: {w:?}")?;
    }
    let db = t.time("build", || Database::from_graph(dictionary, vocabulary, graph));

    if args.stats {
        let (v, e) = db.graph().size_stats();
        writeln!(out, "|V|={v} |E|={e}")?;
    }
    if args.dump_maps {
        db.graph().dump_maps(db.dictionary(), out)?;
    }

    if let Some(path) = &args.query {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let query = t
            .time("parse", || parse_query(&text))
            .with_context(|| format!("parsing {}", path.display()))?;
        let prepared = t.time("prepare", || db.prepare(&query))?;
        let options = ExecOptions {
            config,
            parallel: (args.threads > 1).then_some(ParallelConfig {
                workers: args.threads,
                chunk_size: args.chunk_size,
            }),
            early_filters: true,
        };
        let mut result = if args.oracle {
            t.time("oracle", || -> Result<ResultSet> {
                let mut result = ResultSet {
                    variables: prepared.variables.clone(),
                    ..ResultSet::default()
                };
                for plan in &prepared.branches {
                    let solutions = match config.mode {
                        MatchMode::Homomorphism => brute_homomorphisms(plan.graph(), db.graph()),
                        MatchMode::Isomorphism => brute_isomorphisms(plan.graph(), db.graph()),
                    }?;
                    let mut sink = BranchSink::new(&db, plan);
                    for s in &solutions {
                        sink.emit(s);
                    }
                    result.rows.extend(sink.rows);
                }
                Ok(result)
            })?
        } else {
            t.time("execute", || db.execute(&prepared, &options))?
        };
        if args.sorted {
            result.sort();
        }
        if args.count {
            writeln!(out, "{}", result.len())?;
        } else {
            t.time("decode", || result.write_tsv(&db, out))?;
        }
        if args.stats {
            let s = result.stats;
            writeln!(
                out,
                "regions={} nonempty={} region_vertices={} solutions={}",
                s.regions, s.nonempty_regions, s.region_vertices, s.solutions
            )?;
        }
    }

    if args.timings {
        writeln!(out, "phase\tms")?;
        for (phase, ms) in &t.0 {
            writeln!(out, "{phase}\t{ms:.3}")?;
        }
    }
    Ok(())
}

/// Parses `argv` and runs; returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 1;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    match run_args(&args, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}
