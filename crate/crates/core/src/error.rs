use thiserror::Error;

/// Errors produced by the walk analysis and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OqwError {
    #[error("dimension mismatch: {what} (expected {expected}, found {found})")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("empty matrix family")]
    Empty,

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("invalid coin (deficiency {deficiency:.3e}): {reason}")]
    InvalidCoin { deficiency: f64, reason: String },

    #[error("trivial coin: an operator has an eigenvalue of modulus {modulus:.12} (>= 1)")]
    TrivialCoin { modulus: f64 },

    #[error("{operation} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        operation: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("auxiliary channel is not ergodic; use the generalized criterion instead")]
    NotErgodic,

    #[error("no recurrence criterion applies: {0}")]
    CriterionUnavailable(String),

    #[error("lattice budget exceeded: {requested} steps requested, limit is {limit}")]
    BudgetExceeded { requested: usize, limit: usize },

    #[error("coin defect: {0}")]
    CoinDefect(String),

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, OqwError>;
