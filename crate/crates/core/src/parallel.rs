//! Parallel matching: starting data vertices are handed out in small chunks
//! through a shared atomic cursor, and each worker searches with its own state.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;

use crate::engine::{EngineConfig, EngineError, EngineStats, Matcher, SearchHooks, Solution, SolutionSink};
use crate::graph_store::GraphStore;
use crate::query::QueryGraph;

pub const DEFAULT_CHUNK_SIZE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParallelConfig {
    pub workers: usize,
    pub chunk_size: usize,
}

impl Default for ParallelConfig {
    fn default() -> Self {
        ParallelConfig {
            workers: thread::available_parallelism().map_or(1, |n| n.get()),
            chunk_size: DEFAULT_CHUNK_SIZE,
        }
    }
}

impl ParallelConfig {
    pub fn with_workers(workers: usize) -> Self {
        ParallelConfig {
            workers,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParallelStats {
    pub engine: EngineStats,
    /// Times each chunk was claimed; every entry is 1 after a complete run.
    pub chunk_claims: Vec<usize>,
    /// Chunks processed by each worker.
    pub worker_chunks: Vec<usize>,
}

/// Runs `query` with `par.workers` threads. Each worker emits into its own
/// sink created by `make_sink`; the sinks are returned in worker order.
pub fn parallel_execute_with<S, F>(
    query: &QueryGraph,
    store: &GraphStore,
    config: &EngineConfig,
    hooks: SearchHooks<'_>,
    par: &ParallelConfig,
    make_sink: F,
) -> Result<(Vec<S>, ParallelStats), EngineError>
where
    S: SolutionSink + Send,
    F: Fn() -> S + Sync,
{
    let workers = par.workers.max(1);
    let Some(matcher) = Matcher::new(query, store, *config, hooks)? else {
        return Ok(((0..workers).map(|_| make_sink()).collect(), ParallelStats::default()));
    };
    let reuse = if config.reuse_order {
        matcher.first_order()
    } else {
        None
    };
    let starts = matcher.start_candidates();
    let chunk = par.chunk_size.max(1);
    let chunk_count = starts.len().div_ceil(chunk);
    let cursor = AtomicUsize::new(0);
    let claims: Vec<AtomicUsize> = (0..chunk_count).map(|_| AtomicUsize::new(0)).collect();

    let results: Vec<thread::Result<(S, EngineStats, usize)>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut sink = make_sink();
                    let mut state = matcher.new_state();
                    let mut stats = EngineStats::default();
                    let mut processed = 0;
                    loop {
                        let c = cursor.fetch_add(1, Ordering::Relaxed);
                        if c >= chunk_count {
                            break;
                        }
                        claims[c].fetch_add(1, Ordering::Relaxed);
                        processed += 1;
                        let slice = &starts[c * chunk..((c + 1) * chunk).min(starts.len())];
                        matcher.run(slice, reuse.as_ref(), &mut state, &mut sink, &mut stats);
                    }
                    (sink, stats, processed)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join()).collect()
    });

    let mut sinks = Vec::with_capacity(workers);
    let mut stats = ParallelStats {
        chunk_claims: claims.iter().map(|c| c.load(Ordering::Relaxed)).collect(),
        ..ParallelStats::default()
    };
    for r in results {
        match r {
            Ok((sink, s, processed)) => {
                sinks.push(sink);
                stats.engine.merge(&s);
                stats.worker_chunks.push(processed);
            }
            Err(payload) => {
                let msg = payload
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| payload.downcast_ref::<String>().cloned())
                    .unwrap_or_else(|| "unknown panic".to_string());
                return Err(EngineError::Execution(msg));
            }
        }
    }
    Ok((sinks, stats))
}

/// Runs `query` in parallel and returns all solutions, sorted.
pub fn parallel_execute(
    query: &QueryGraph,
    store: &GraphStore,
    config: &EngineConfig,
    par: &ParallelConfig,
) -> Result<(Vec<Solution>, ParallelStats), EngineError> {
    let (buffers, stats) =
        parallel_execute_with(query, store, config, SearchHooks::default(), par, Vec::<Solution>::new)?;
    let mut all: Vec<Solution> = buffers.into_iter().flatten().collect();
    all.sort();
    Ok((all, stats))
}
