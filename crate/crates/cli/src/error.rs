use std::path::PathBuf;

/// Exit status for a run that completed.
pub const EXIT_OK: u8 = 0;
/// Evaluation failures and violated internal invariants.
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
/// Malformed matrix files and configurations that fail the schema.
pub const EXIT_PARSE: u8 = 3;
/// The exact oracle refused an instance that exceeds its size guard.
pub const EXIT_RESOURCE: u8 = 4;
pub const EXIT_IO: u8 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] lexicase_core::Error),
    #[error("{path}: line {line}: {message}")]
    Parse { path: String, line: u64, message: String },
    #[error("invalid configuration: {0}")]
    Schema(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use lexicase_core::Error as E;
        match self {
            CliError::Core(E::Usage(_)) | CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(E::Config(_)) | CliError::Parse { .. } | CliError::Schema(_) => EXIT_PARSE,
            CliError::Core(E::Resource(_)) => EXIT_RESOURCE,
            CliError::Core(E::Evaluation { .. } | E::Internal(_)) => EXIT_FAILURE,
            CliError::Io { .. } => EXIT_IO,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
