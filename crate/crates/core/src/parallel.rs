//! Fork-join variant of the simplified auction.
//!
//! Each bid's argmin over `n_u` is split into contiguous slices evaluated by a pool of
//! workers; every worker returns its local `(h, index)` minimum and the slices are
//! combined with the same smallest-index tie-break as the sequential solver. Matching
//! updates, level increments and queue pushes stay on the coordinating thread, so the
//! result is identical to [`crate::auction::run`].

use std::time::Instant;

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::auction::{argmin_level, AuctionState, MatchResult, StepReport};
use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParallelConfig {
    q_workers: usize,
    chunk_min: usize,
}

impl ParallelConfig {
    pub const DEFAULT_CHUNK_MIN: usize = 64;

    pub fn new(q_workers: usize) -> Result<Self> {
        Self::with_chunk_min(q_workers, Self::DEFAULT_CHUNK_MIN)
    }

    pub fn with_chunk_min(q_workers: usize, chunk_min: usize) -> Result<Self> {
        if q_workers == 0 {
            return Err(Error::InvalidParameter("q_workers must be at least 1".into()));
        }
        Ok(Self {
            q_workers,
            chunk_min: chunk_min.max(1),
        })
    }

    pub fn q_workers(&self) -> usize {
        self.q_workers
    }

    pub fn chunk_min(&self) -> usize {
        self.chunk_min
    }

    /// Number of slices for a neighbour list of length `len`.
    fn slices_for(&self, len: usize) -> usize {
        (len / self.chunk_min).clamp(1, self.q_workers)
    }
}

pub fn run_parallel(g: &BipartiteGraph, cfg: &ParallelConfig) -> MatchResult {
    run_parallel_with(g, cfg, |_, _| {})
}

pub fn run_parallel_with<F>(g: &BipartiteGraph, cfg: &ParallelConfig, mut observer: F) -> MatchResult
where
    F: FnMut(&StepReport, &AuctionState<'_>),
{
    let pool = (cfg.q_workers > 1).then(|| build_pool(cfg.q_workers));
    let mut state = AuctionState::new(g);
    while state.termination().is_none() {
        let u = state.take_bidder().expect("guard checked by termination()");
        let neighbors = g.neighbors_u(u);
        let slices = cfg.slices_for(neighbors.len());
        let best = match &pool {
            Some(pool) if slices > 1 => parallel_argmin(pool, neighbors, state.h(), slices),
            _ => argmin_level(neighbors, state.h()),
        };
        let (_, j) = best.expect("queued vertices have non-empty neighbourhoods");
        let report = state.commit(u, j);
        observer(&report, &state);
    }
    state.into_result()
}

fn build_pool(threads: usize) -> ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("failed to start worker pool")
}

fn parallel_argmin(
    pool: &ThreadPool,
    neighbors: &[usize],
    h: &[u32],
    slices: usize,
) -> Option<(u32, usize)> {
    let chunk = neighbors.len().div_ceil(slices);
    pool.install(|| {
        neighbors
            .par_chunks(chunk)
            .map(|slice| argmin_level(slice, h))
            // (level, index) ordering reproduces the sequential tie-break
            .reduce(|| None, |a, b| match (a, b) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, None) => x,
                (None, y) => y,
            })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeRow {
    pub q: usize,
    pub wall_time_ns: u128,
}

/// Times [`run_parallel`] once for each worker count in `q_list`.
pub fn speedup_probe(g: &BipartiteGraph, q_list: &[usize]) -> Result<Vec<ProbeRow>> {
    q_list
        .iter()
        .map(|&q| {
            let cfg = ParallelConfig::new(q)?;
            let start = Instant::now();
            let result = run_parallel(g, &cfg);
            let elapsed = start.elapsed().as_nanos().max(1);
            std::hint::black_box(result);
            Ok(ProbeRow {
                q,
                wall_time_ns: elapsed,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::{run, Termination};
    use crate::graph::{generate_bnp, GraphGenSpec};

    #[test]
    fn single_worker_matches_sequential() {
        let g = generate_bnp(&GraphGenSpec::new(40, 0.2, 11).unwrap());
        assert_eq!(run_parallel(&g, &ParallelConfig::new(1).unwrap()), run(&g));
    }

    #[test]
    fn small_chunks_force_parallel_reduction() {
        let g = generate_bnp(&GraphGenSpec::new(60, 0.3, 5).unwrap());
        let expected = run(&g);
        for q in [2, 3, 4, 8] {
            let cfg = ParallelConfig::with_chunk_min(q, 1).unwrap();
            assert_eq!(run_parallel(&g, &cfg), expected, "q = {q}");
        }
    }

    #[test]
    fn empty_graph_for_every_q() {
        let g = BipartiteGraph::empty(5);
        for q in [1, 2, 4, 8] {
            let r = run_parallel(&g, &ParallelConfig::new(q).unwrap());
            assert_eq!(r.termination, Termination::NoFreeMatchable);
            assert_eq!(r.iterations, 0);
        }
    }

    #[test]
    fn config_validation() {
        assert!(ParallelConfig::new(0).is_err());
        let cfg = ParallelConfig::with_chunk_min(4, 0).unwrap();
        assert_eq!(cfg.chunk_min(), 1);
        let cfg = ParallelConfig::new(4).unwrap();
        assert_eq!(cfg.slices_for(10), 1);
        assert_eq!(cfg.slices_for(200), 3);
        assert_eq!(cfg.slices_for(10_000), 4);
    }

    #[test]
    fn probe_single_row() {
        let g = BipartiteGraph::complete(16);
        let rows = speedup_probe(&g, &[1]).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].wall_time_ns > 0);
    }
}
