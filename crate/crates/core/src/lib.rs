//! Auction-based bipartite maximum-cardinality matching.
//!
//! The crate provides:
//!
//! * [`graph`]: bipartite graphs, `B(N, p)` random generation, sparsification and a text file format.
//! * [`auction`]: the simplified auction for maximum-cardinality matching, as a one-shot solver
//!   and as a stepwise state machine.
//! * [`assignment`]: the general epsilon-auction on dense reward matrices.
//! * [`verify`]: Hopcroft-Karp and a second augmenting-path matcher used as oracles, plus
//!   checkers for the structural properties of auction states.
//! * [`parallel`]: a fork-join variant of the simplified auction whose output is identical to
//!   the sequential solver.
//! * [`experiment`]: the scaling-experiment harness behind the `bench` subcommand.

pub mod assignment;
pub mod auction;
mod error;
pub mod experiment;
pub mod graph;
mod matching;
pub mod parallel;
pub mod verify;

pub use auction::{AuctionState, MatchResult, SelectionPolicy, Snapshot, StepReport, Termination};
pub use error::{Error, Result};
pub use graph::{BipartiteGraph, GraphGenSpec};
pub use matching::Matching;
pub use parallel::ParallelConfig;
