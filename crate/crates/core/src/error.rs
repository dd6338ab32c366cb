use thiserror::Error;

/// Errors raised by schedule generation, plan construction, execution and the
/// benchmark harness.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("validation failed for size {size}, strategy {strategy}: {detail}")]
    Validation {
        size: usize,
        strategy: String,
        detail: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
