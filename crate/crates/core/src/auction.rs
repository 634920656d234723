//! Simplified auction for bipartite maximum-cardinality matching.
//!
//! Every right vertex `v` carries an integer level `h_v` (its price in units of `1/n`).
//! A free left vertex `u` takes the neighbour with the lowest level, evicting its current
//! owner, and that neighbour's level goes up by one. The run stops when the matching is
//! perfect, when the level sum reaches the cap `n(n-1) + 1`, or when no free vertex with a
//! non-empty neighbourhood is left.
//!
//! Each bid raises exactly one level by one, so the iteration counter always equals
//! `Σ h_v`.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::matching::Matching;

/// Which free left vertex bids next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SelectionPolicy {
    /// Oldest free vertex first; evicted vertices join at the back.
    #[default]
    Fifo,
    /// Most recently freed vertex first.
    Lifo,
    /// Uniformly random free vertex from a seeded stream.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Termination {
    Perfect,
    LevelCapReached,
    NoFreeMatchable,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Perfect => "Perfect",
            Termination::LevelCapReached => "LevelCapReached",
            Termination::NoFreeMatchable => "NoFreeMatchable",
        }
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One bid: `u` took `j`, possibly evicting `evicted`; `h_j` is the raised level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepReport {
    pub u: usize,
    pub j: usize,
    pub evicted: Option<usize>,
    pub h_j: u32,
    pub iteration: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub matching: Matching,
    pub h: Vec<u32>,
    pub iterations: u64,
    pub termination: Termination,
}

impl MatchResult {
    pub fn cardinality(&self) -> usize {
        self.matching.len()
    }
}

/// Owned copy of the mutable part of an [`AuctionState`].
///
/// Fields are public so that checkers can also be exercised on hand-built states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub h: Vec<u32>,
    pub matching: Matching,
    /// Free left vertices that can still bid, in queue order.
    pub free: Vec<usize>,
    pub iteration: u64,
}

/// Upper limit on `Σ h_v`: the run stops once the level sum reaches `n(n-1) + 1`.
///
/// With a perfect matching every level stays at most `n`, and until the matching is
/// complete some right vertex is still unmatched at level 0, so `Σ h_v ≤ n(n-1)` before
/// the final bid. A guard of `Σ h_v < n(n-1)` would cut off instances that need that
/// last bid (e.g. `n = 2` with edges `{(0,0), (0,1), (1,0)}` needs `T = 3`).
pub fn level_cap(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) + 1
}

/// Lowest `(h_v, v)` over `neighbors`, ties going to the smallest index.
///
/// `neighbors` must be ascending for the tie-break to hold.
#[inline]
pub(crate) fn argmin_level(neighbors: &[usize], h: &[u32]) -> Option<(u32, usize)> {
    let mut best: Option<(u32, usize)> = None;
    for &v in neighbors {
        let level = h[v];
        match best {
            Some((b, _)) if level >= b => {}
            _ => best = Some((level, v)),
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct AuctionState<'g> {
    graph: &'g BipartiteGraph,
    matching: Matching,
    h: Vec<u32>,
    free_queue: VecDeque<usize>,
    unmatchable: Vec<usize>,
    iteration: u64,
    cap: u64,
    policy: SelectionPolicy,
    rng: Option<ChaCha8Rng>,
}

impl<'g> AuctionState<'g> {
    pub fn new(graph: &'g BipartiteGraph) -> Self {
        Self::with_policy(graph, SelectionPolicy::Fifo)
    }

    /// Levels at zero, empty matching, every left vertex with a neighbour queued in
    /// ascending order and every isolated left vertex marked unmatchable.
    pub fn with_policy(graph: &'g BipartiteGraph, policy: SelectionPolicy) -> Self {
        let n = graph.n();
        let (queued, unmatchable): (Vec<usize>, Vec<usize>) =
            (0..n).partition(|&u| !graph.neighbors_u(u).is_empty());
        let free_queue = VecDeque::from(queued);
        let rng = match policy {
            SelectionPolicy::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        Self {
            graph,
            matching: Matching::empty(n),
            h: vec![0; n],
            free_queue,
            unmatchable,
            iteration: 0,
            cap: level_cap(n),
            policy,
            rng,
        }
    }

    pub fn graph(&self) -> &'g BipartiteGraph {
        self.graph
    }

    pub fn matching(&self) -> &Matching {
        &self.matching
    }

    pub fn h(&self) -> &[u32] {
        &self.h
    }

    pub fn free_queue(&self) -> &VecDeque<usize> {
        &self.free_queue
    }

    pub fn unmatchable(&self) -> &[usize] {
        &self.unmatchable
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn level_cap(&self) -> u64 {
        self.cap
    }

    pub fn policy(&self) -> SelectionPolicy {
        self.policy
    }

    /// Why the run would stop now, or `None` if another bid is allowed.
    pub fn termination(&self) -> Option<Termination> {
        if self.matching.is_perfect() {
            Some(Termination::Perfect)
        } else if self.iteration >= self.cap {
            Some(Termination::LevelCapReached)
        } else if self.free_queue.is_empty() {
            Some(Termination::NoFreeMatchable)
        } else {
            None
        }
    }

    /// Performs one bid by the next free vertex.
    pub fn bid_step(&mut self) -> Result<StepReport> {
        let u = self.take_bidder()?;
        let (_, j) = argmin_level(self.graph.neighbors_u(u), &self.h)
            .expect("queued vertices have non-empty neighbourhoods");
        Ok(self.commit(u, j))
    }

    /// Removes the next bidder from the queue after checking the loop guard.
    pub(crate) fn take_bidder(&mut self) -> Result<usize> {
        if self.iteration >= self.cap {
            return Err(Error::CapExceeded {
                sum: self.iteration,
                cap: self.cap,
            });
        }
        let u = match self.policy {
            SelectionPolicy::Fifo => self.free_queue.pop_front(),
            SelectionPolicy::Lifo => self.free_queue.pop_back(),
            SelectionPolicy::Random { .. } => {
                if self.free_queue.is_empty() {
                    None
                } else {
                    let rng = self.rng.as_mut().expect("random policy carries a stream");
                    let i = rng.gen_range(0..self.free_queue.len());
                    self.free_queue.remove(i)
                }
            }
        };
        u.ok_or(Error::NoFreeVertex)
    }

    /// Matches `u` to `j`, requeues the evicted owner and raises `h_j`.
    pub(crate) fn commit(&mut self, u: usize, j: usize) -> StepReport {
        let evicted = self.matching.insert(u, j);
        if let Some(old) = evicted {
            self.free_queue.push_back(old);
        }
        self.h[j] += 1;
        self.iteration += 1;
        StepReport {
            u,
            j,
            evicted,
            h_j: self.h[j],
            iteration: self.iteration,
        }
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            h: self.h.clone(),
            matching: self.matching.clone(),
            free: self.free_queue.iter().copied().collect(),
            iteration: self.iteration,
        }
    }

    pub fn check_eps_cs(&self) -> bool {
        eps_cs_holds(self.graph, &self.h, &self.matching)
    }

    pub fn into_result(self) -> MatchResult {
        let termination = self
            .termination()
            .expect("into_result called on a state that can still bid");
        MatchResult {
            matching: self.matching,
            h: self.h,
            iterations: self.iteration,
            termination,
        }
    }
}

/// Simplified epsilon complementary slackness: every matched pair `(u, j)` satisfies
/// `h_j - 1 <= min over v in n_u of h_v`.
pub fn check_eps_cs(g: &BipartiteGraph, snapshot: &Snapshot) -> bool {
    eps_cs_holds(g, &snapshot.h, &snapshot.matching)
}

fn eps_cs_holds(g: &BipartiteGraph, h: &[u32], matching: &Matching) -> bool {
    matching.pairs().all(|(u, j)| {
        let min = g.neighbors_u(u).iter().map(|&v| h[v]).min().unwrap_or(0);
        u64::from(h[j]) <= u64::from(min) + 1
    })
}

pub fn run(g: &BipartiteGraph) -> MatchResult {
    run_with(g, SelectionPolicy::Fifo, |_, _| {})
}

/// Runs to termination, calling `observer` after every bid.
pub fn run_with<F>(g: &BipartiteGraph, policy: SelectionPolicy, mut observer: F) -> MatchResult
where
    F: FnMut(&StepReport, &AuctionState<'_>),
{
    let mut state = AuctionState::with_policy(g, policy);
    while state.termination().is_none() {
        let report = state.bid_step().expect("guard checked by termination()");
        observer(&report, &state);
    }
    state.into_result()
}

/// `n·(c̃·ln n / ln(n·p)) + n`, the `N(L+1)` iteration bound.
pub fn iteration_bound(n: usize, p: f64, c_tilde: f64) -> Result<f64> {
    let n = n as f64;
    let np = n * p;
    if !(np > 1.0) {
        return Err(Error::Domain(format!("n·p = {np} must exceed 1")));
    }
    if !(c_tilde >= 0.0) || !c_tilde.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "c_tilde = {c_tilde} must be finite and non-negative"
        )));
    }
    Ok(n * (c_tilde * n.ln() / np.ln()) + n)
}
