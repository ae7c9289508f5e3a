use thiserror::Error;

/// Errors shared across the solver, optimizer, generator and verification modules.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("fixed-point iteration did not converge within {max_iterations} iterations")]
    NonConvergence { max_iterations: usize },

    #[error("singular noise covariance: {0}")]
    SingularNoise(String),

    #[error("argument outside the admissible domain: {0}")]
    DomainError(String),

    #[error("posterior covariance not recoverable: dynamics matrix is singular")]
    NotRecoverable,

    #[error("operation requires a finite steady state but the input is unbounded")]
    UnboundedInput,

    #[error("budget {budget} exceeds the catalog size {q}")]
    BudgetExceedsCatalog { budget: usize, q: usize },

    #[error("{q} sensors exceed the exhaustive enumeration guard of {max}")]
    TooManySensors { q: usize, max: usize },

    #[error("{tau} subsets exceed the cover enumeration guard of {max}")]
    TooManySubsets { tau: usize, max: usize },

    #[error("lemma hypotheses violated: {0}")]
    HypothesisViolation(String),

    #[error("ambiguous numerical rank: {0}")]
    RankDeficiency(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
