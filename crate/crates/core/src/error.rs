use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid partial-quotient source: {0}")]
    InvalidSource(String),

    #[error("continued fraction exhausted: requested convergent {requested}, only {available} available")]
    DepthExhausted { requested: usize, available: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("guardrail exceeded: {0}")]
    Guardrail(String),

    #[error("empty input")]
    Empty,

    #[error("harmonic {0} was not traced")]
    MissingHarmonic(u64),

    #[error("division domain: {0}")]
    Domain(String),

    #[error("precision unattainable: {0}")]
    Precision(String),

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
