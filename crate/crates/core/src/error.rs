use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("invalid norm: {0}")]
    InvalidNorm(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("quotient not surjective")]
    NotSurjective,
    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },
    #[error("{subsets} subsets exceed the enumeration cap {cap}; use greedy selection")]
    EnumerationCap { subsets: u128, cap: u128 },
    #[error("too many vertices ({0}) in unit ball enumeration")]
    TooManyVertices(usize),
    #[error("volume ratio {ratio} exceeds bound {bound}")]
    BoundViolated { ratio: f64, bound: f64 },
}
