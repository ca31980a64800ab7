//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A distribution or model parameter is outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A function argument violates the call contract.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Internal state does not support the requested operation.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Input file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Format { line: usize, message: String },

    /// Input parsed but violates the expected schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// A design matrix is rank deficient.
    #[error("rank-deficient design: {0}")]
    RankDeficient(String),

    /// A numerical routine failed (non-SPD matrix, NaN, ...).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// An iterative fit diverged.
    #[error("optimization failure after {steps} steps: {message}")]
    OptimizationFailure { steps: usize, message: String },

    /// An experiment configuration is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// A failure tagged with the simulation round it occurred in.
    #[error("round {round}: {source}")]
    AtRound {
        round: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wraps an error with the simulation round it surfaced in.
    pub fn at_round(self, round: u64) -> Self {
        Error::AtRound {
            round,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
