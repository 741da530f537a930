use thiserror::Error;

use crate::convexify::MinimaxSolution;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("functions live on different grids")]
    GridMismatch,

    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("non-finite value at grid point {index}")]
    NonFinite { index: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("{what} is negative at grid point {point}")]
    Negative { what: String, point: usize },

    #[error("term {index} exceeds the declared bound {bound} (sup-norm {sup})")]
    BoundExceeded { index: usize, bound: f64, sup: f64 },

    #[error("sequence is not nonincreasing: term {index} exceeds term {} at grid point {point}", .index - 1)]
    NotMonotone { index: usize, point: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid too coarse: {0}")]
    Resolution(String),

    #[error("solver did not converge after {iterations} iterations (gap {gap:e})")]
    NotConverged {
        iterations: usize,
        gap: f64,
        best: Box<MinimaxSolution>,
    },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
