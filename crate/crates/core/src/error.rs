use thiserror::Error;

use crate::matspace::Mat;

/// Errors raised by the toolkit. Predicate failures are not errors; they are
/// carried by [`crate::integrand::PredicateReport`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("shape error in `{node}`: {msg}")]
    ExprShape { node: String, msg: String },

    #[error("negative energy value {0} (integrands map into [0, +inf])")]
    NegativeEnergy(f64),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("precondition failed: {msg}")]
    Precondition { msg: String, witness: Option<Mat> },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Machine-readable kind written into `result.json`.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Shape { .. } => "shape",
            Error::Syntax { .. } => "syntax",
            Error::ExprShape { .. } => "expr-shape",
            Error::NegativeEnergy(_) => "negative-energy",
            Error::Budget(_) => "budget",
            Error::Precondition { .. } => "precondition",
            Error::Internal(_) => "internal",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
