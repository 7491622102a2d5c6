use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cannot parse root system type `{0}`")]
    Parse(String),

    #[error("unsupported rank {rank} for type {family}")]
    UnsupportedRank { family: char, rank: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{what}: estimated size {estimated} exceeds cap {cap}")]
    CapExceeded {
        what: &'static str,
        estimated: u128,
        cap: u128,
    },

    #[error("continuation failed at t = {t} (step fell below {min_step})")]
    ContinuationFailure { t: f64, min_step: f64 },

    #[error("near-singular Jacobian at t = {t} (condition estimate {condition:e})")]
    NearSingularJacobian { t: f64, condition: f64 },

    #[error("no deck transformation matches the two points within {tol}")]
    NoDeckMatch { tol: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("elimination did not terminate within {0} steps")]
    ReductionGuard(usize),

    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
