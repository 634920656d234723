use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: duplicate edge ({u}, {v})")]
    DuplicateEdge { line: usize, u: usize, v: usize },

    #[error("line {line}: vertex index {index} out of range for n = {n}")]
    IndexOutOfRange { line: usize, index: usize, n: usize },

    #[error("no free vertex left to bid")]
    NoFreeVertex,

    #[error("level cap reached: sum of levels {sum} >= {cap}")]
    CapExceeded { sum: u64, cap: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite reward at ({row}, {col})")]
    NonFiniteReward { row: usize, col: usize },

    #[error("auction did not finish within {limit} bids")]
    IterationLimit { limit: u64 },

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
