use std::path::PathBuf;

use thiserror::Error;

/// CLI failures, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] frst_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: sample times are not uniformly spaced ({detail})")]
    NonUniformGrid { path: PathBuf, detail: String },
    #[error("{path}: unsupported format: {detail}")]
    UnsupportedFormat { path: PathBuf, detail: String },
    #[error("verification failed: {failed} of {total} checks")]
    VerificationFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Parse { path: path.into(), message: message.into() }
    }

    /// 1 verification failure, 2 usage or configuration, 3 I/O or parse.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerificationFailed { .. } => 1,
            CliError::Usage(_) | CliError::Core(_) => 2,
            CliError::Io { .. }
            | CliError::Parse { .. }
            | CliError::NonUniformGrid { .. }
            | CliError::UnsupportedFormat { .. } => 3,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
