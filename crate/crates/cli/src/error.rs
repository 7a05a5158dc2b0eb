use std::fmt::Display;
use std::path::{Path, PathBuf};

/// Process exit status for each error class.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags or an inconsistent configuration.
    #[error("{0}")]
    Usage(String),
    /// An input file is missing, unreadable or malformed.
    #[error("{}: {message}", file.display())]
    Data { file: PathBuf, message: String },
    /// Inputs are individually valid but the analysis cannot proceed.
    #[error("{0}")]
    Analysis(String),
    /// Outputs were written, but at least one model did not converge.
    #[error("{0}")]
    NotConverged(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Data { .. } | Self::Analysis(_) | Self::Io { .. } => EXIT_DATA,
            Self::NotConverged(_) => EXIT_NOT_CONVERGED,
        }
    }

    pub fn usage(message: impl Display) -> Self {
        Self::Usage(message.to_string())
    }

    pub fn data(file: &Path, message: impl Display) -> Self {
        Self::Data {
            file: file.to_path_buf(),
            message: message.to_string(),
        }
    }

    pub fn analysis(message: impl Display) -> Self {
        Self::Analysis(message.to_string())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
