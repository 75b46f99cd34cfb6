use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the mathematical domain of the operation (e.g. factorizing 0).
    #[error("domain error: {0}")]
    Domain(String),
    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Malformed input that fails structural validation (partitions, tables, sets).
    #[error("validation error: {0}")]
    Validation(String),
    /// The request is well-formed but the answer is not representable here.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// Configured memory/size budget would be exceeded.
    #[error("resource limit: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure {
    ($cond:expr, $kind:ident, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::$kind(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure;
