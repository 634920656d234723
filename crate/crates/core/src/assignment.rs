//! Forward epsilon-auction for the assignment problem on a dense reward matrix.
//!
//! Persons `n` bid for objects `k`. An unassigned person finds its best profit
//! `γ = max_k R(n,k) − ρ_k` at object `k̃` and the second best `ω` over `k ≠ k̃`, takes
//! `k̃` (evicting the previous owner) and raises `ρ_k̃` by `γ − ω + ε`. Only the column
//! maxima of the bid matrix matter, so prices are kept directly and bids are not stored.
//!
//! At termination every assigned person is within `ε` of its best profit, and the total
//! reward is within `N·ε` of optimal.

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rewards `R(n, k)` for `N` persons and `K ≥ N` objects, plus the bid slack `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardInstance {
    persons: usize,
    objects: usize,
    rewards: Vec<f64>,
    epsilon: f64,
}

impl RewardInstance {
    pub fn new(rows: Vec<Vec<f64>>, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon = {epsilon} must be positive and finite"
            )));
        }
        let persons = rows.len();
        if persons == 0 {
            return Err(Error::InvalidParameter("reward matrix has no rows".into()));
        }
        let objects = rows[0].len();
        if rows.iter().any(|r| r.len() != objects) {
            return Err(Error::InvalidParameter("reward matrix rows differ in length".into()));
        }
        if persons > objects {
            return Err(Error::InvalidParameter(format!(
                "{persons} persons cannot all be assigned to {objects} objects"
            )));
        }
        for (row, r) in rows.iter().enumerate() {
            if let Some(col) = r.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFiniteReward { row, col });
            }
        }
        Ok(Self {
            persons,
            objects,
            rewards: rows.into_iter().flatten().collect(),
            epsilon,
        })
    }

    pub fn persons(&self) -> usize {
        self.persons
    }

    pub fn objects(&self) -> usize {
        self.objects
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    #[inline]
    pub fn reward(&self, person: usize, object: usize) -> f64 {
        self.rewards[person * self.objects + object]
    }

    pub fn row(&self, person: usize) -> &[f64] {
        &self.rewards[person * self.objects..(person + 1) * self.objects]
    }

    /// Sum of rewards over an assignment.
    pub fn total_reward(&self, assignment: &[Option<usize>]) -> f64 {
        assignment
            .iter()
            .enumerate()
            .filter_map(|(n, k)| k.map(|k| self.reward(n, k)))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AuctionOptions {
    /// Bid only on objects with a positive reward; persons without one stay unassigned.
    pub restrict_positive: bool,
    /// Abort after this many bids.
    pub max_iterations: Option<u64>,
}

/// Prices and the person → object map `η`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentState {
    pub prices: Vec<f64>,
    pub assignment: Vec<Option<usize>>,
    owner: Vec<Option<usize>>,
    unassigned: VecDeque<usize>,
}

impl AssignmentState {
    pub fn new(inst: &RewardInstance) -> Self {
        Self {
            prices: vec![0.0; inst.objects()],
            assignment: vec![None; inst.persons()],
            owner: vec![None; inst.objects()],
            unassigned: (0..inst.persons()).collect(),
        }
    }

    /// Builds a state from explicit prices and assignment, e.g. to test the checker.
    pub fn from_parts(prices: Vec<f64>, assignment: Vec<Option<usize>>) -> Result<Self> {
        let mut owner = vec![None; prices.len()];
        for (n, k) in assignment.iter().enumerate() {
            if let Some(k) = *k {
                if k >= prices.len() || owner[k].replace(n).is_some() {
                    return Err(Error::InvalidMatching(format!(
                        "object {k} is out of range or assigned twice"
                    )));
                }
            }
        }
        let unassigned = assignment
            .iter()
            .enumerate()
            .filter(|(_, k)| k.is_none())
            .map(|(n, _)| n)
            .collect();
        Ok(Self {
            prices,
            assignment,
            owner,
            unassigned,
        })
    }

    pub fn unassigned(&self) -> &VecDeque<usize> {
        &self.unassigned
    }
}

/// Transient values of one bid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BidReport {
    pub person: usize,
    pub object: usize,
    /// Best profit `γ`.
    pub best: f64,
    /// Second-best profit `ω`.
    pub second: f64,
    pub increment: f64,
    pub evicted: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentResult {
    pub assignment: Vec<Option<usize>>,
    pub prices: Vec<f64>,
    pub total_reward: f64,
    pub iterations: u64,
}

pub fn auction_solve(inst: &RewardInstance) -> Result<AssignmentResult> {
    auction_solve_with(inst, AuctionOptions::default(), |_, _| {})
}

pub fn auction_solve_with<F>(
    inst: &RewardInstance,
    opts: AuctionOptions,
    mut observer: F,
) -> Result<AssignmentResult>
where
    F: FnMut(&BidReport, &AssignmentState),
{
    let mut state = AssignmentState::new(inst);
    let mut iterations = 0u64;
    while let Some(person) = state.unassigned.pop_front() {
        if opts.max_iterations.is_some_and(|cap| iterations >= cap) {
            return Err(Error::IterationLimit { limit: iterations });
        }
        let Some(report) = bid(inst, &mut state, person, opts.restrict_positive) else {
            continue;
        };
        iterations += 1;
        observer(&report, &state);
    }
    Ok(AssignmentResult {
        total_reward: inst.total_reward(&state.assignment),
        assignment: state.assignment,
        prices: state.prices,
        iterations,
    })
}

/// One bid by `person`; `None` if it has nothing to bid on.
fn bid(
    inst: &RewardInstance,
    state: &mut AssignmentState,
    person: usize,
    restrict_positive: bool,
) -> Option<BidReport> {
    let row = inst.row(person);
    let mut best: Option<(f64, usize)> = None;
    let mut second = f64::NEG_INFINITY;
    for (k, (&r, &price)) in row.iter().zip(&state.prices).enumerate() {
        if restrict_positive && r <= 0.0 {
            continue;
        }
        let profit = r - price;
        match best {
            Some((b, _)) if profit <= b => second = second.max(profit),
            Some((b, _)) => {
                second = b;
                best = Some((profit, k));
            }
            None => best = Some((profit, k)),
        }
    }
    let (gamma, object) = best?;
    // a lone candidate object raises its price by exactly epsilon
    let omega = if second == f64::NEG_INFINITY { gamma } else { second };
    let increment = gamma - omega + inst.epsilon();
    state.prices[object] += increment;

    let evicted = state.owner[object].replace(person);
    if let Some(old) = evicted {
        state.assignment[old] = None;
        state.unassigned.push_back(old);
    }
    state.assignment[person] = Some(object);
    Some(BidReport {
        person,
        object,
        best: gamma,
        second: omega,
        increment,
        evicted,
    })
}

/// True iff every assigned person satisfies
/// `R(n,η_n) − ρ_{η_n} ≥ max_k (R(n,k) − ρ_k) − ε`.
///
/// A relative slack of `1e-9` absorbs rounding in the price updates.
pub fn verify_eps_cs_general(inst: &RewardInstance, state: &AssignmentState) -> bool {
    state.assignment.iter().enumerate().all(|(n, k)| {
        let Some(k) = *k else { return true };
        let own = inst.reward(n, k) - state.prices[k];
        let best = inst
            .row(n)
            .iter()
            .zip(&state.prices)
            .map(|(r, p)| r - p)
            .fold(f64::NEG_INFINITY, f64::max);
        let slack = 1e-9 * own.abs().max(best.abs()).max(1.0);
        own + slack >= best - inst.epsilon()
    })
}

/// Reads a reward matrix from headerless CSV, one row per person.
pub fn read_rewards_csv(path: impl AsRef<Path>) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|_| Error::Parse {
                    line: i + 1,
                    message: format!("expected a number, found {field:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}
