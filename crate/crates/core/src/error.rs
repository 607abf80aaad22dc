use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Bad arguments: out-of-range indices, invalid rates, malformed vectors.
    #[error("usage error: {0}")]
    Usage(String),
    /// The exact oracle refused an instance that exceeds its size guard.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("evaluation of individual {individual} on case {case} failed: {reason}")]
    Evaluation {
        individual: usize,
        case: usize,
        reason: String,
    },
    /// Inconsistent run configuration, detected before a run starts.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

macro_rules! usage {
    ($($arg:tt)*) => {
        $crate::error::Error::Usage(alloc::format!($($arg)*))
    };
}
pub(crate) use usage;
