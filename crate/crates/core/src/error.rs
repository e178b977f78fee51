use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed arguments: indices out of range, wrong dimensions, bad flags.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Input is well formed but outside the operation's domain
    /// (e.g. a matrix that is not in the required subgroup).
    #[error("domain error: {0}")]
    Domain(String),

    /// A case the implementation deliberately refuses to handle rather than
    /// produce a wrong answer.
    #[error("unsupported case: {0}")]
    Unsupported(String),

    /// A search or expansion exceeded its configured budget.
    #[error("budget exhausted: {0}")]
    Budget(String),

    /// A step-local invariant of an algorithm failed; carries a diagnostic.
    #[error("internal invariant failed: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
