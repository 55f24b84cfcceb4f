use thiserror::Error;

use crate::linalg::LinalgError;
use crate::odt::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("tensor order m must be >= 3 (got {0})")]
    OrderTooSmall(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid decomposition: {}", join_violations(.0))]
    InvalidDecomposition(Vec<Violation>),

    #[error("nonpositive lambda {value} at index {index}")]
    NonPositiveLambda { index: usize, value: f64 },

    #[error("sign pattern supplied for odd order m = {0}")]
    SignPatternForOddOrder(usize),

    #[error("invalid index selection: {0}")]
    InvalidSelection(String),

    #[error("eigenpair residual {residual:e} exceeds {bound:e}")]
    Residual { residual: f64, bound: f64 },

    #[error("rank {rank} exceeds the enumeration limit {limit}; pass the override to proceed")]
    TooManyClasses { rank: usize, limit: usize },

    #[error("count overflows u128 for m = {order}, exponent {exponent}")]
    CountOverflow { order: usize, exponent: usize },

    #[error("power iteration produced a zero update at iteration {0}")]
    ZeroUpdate(usize),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
