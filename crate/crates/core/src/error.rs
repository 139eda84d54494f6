use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot parse source `{spec}`: {reason}")]
    ParseSource { spec: String, reason: String },

    #[error("lossless stage holds {size} blocks but the budget is only {budget}")]
    Capacity { size: u128, budget: u128 },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("index {index} does not decode to a block: {reason}")]
    Decode { index: u128, reason: String },

    #[error(
        "block length {n} exceeds the exact enumeration cap {cap}; \
         use epsilon as an upper bound on sigma instead"
    )]
    ExactCapExceeded { n: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
