//! Error type shared across the toolkit.

use thiserror::Error;

/// Errors raised by log construction, nuisance fitting, and estimation.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Batch boundaries are malformed (not ascending, wrong endpoints, empty).
    #[error("invalid batch schedule: {0}")]
    InvalidSchedule(String),

    /// A probability table failed validation.
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    /// Environment parameters are out of range.
    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),

    /// A bandit log violates its structural invariants.
    #[error("invalid log: {0}")]
    InvalidLog(String),

    /// Text input could not be parsed. Lines are 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The evaluation policy puts mass on an action the behavior policy
    /// never plays, so the importance ratio is undefined.
    #[error("zero behavior propensity for action {action}")]
    ZeroPropensity { action: usize },

    /// An action has no batch in which it is played with positive
    /// probability, so no convex recombination can recover its value.
    #[error("deficient support: action {action} is dead in every batch")]
    DeficientSupport { action: usize },

    /// Covariate dimension does not match the fitted model.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// A parameter is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The operation needs a finite covariate space.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A linear solve or iteration failed numerically.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
