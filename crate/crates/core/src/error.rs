use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("unsupported representation: {0}")]
    Unsupported(String),
    #[error("synthesis error at message {message}, step {step}, prefix {prefix:?}: {reason}")]
    Synthesis {
        message: usize,
        step: usize,
        prefix: Vec<usize>,
        reason: String,
    },
    #[error("duality violation at message {message}, step {step}, prefix {prefix:?}")]
    DualityViolation {
        message: usize,
        step: usize,
        prefix: Vec<usize>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
