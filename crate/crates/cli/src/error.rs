use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, bad config values, or parameters that fail validation.
    #[error("{0}")]
    Usage(String),
    /// The computation itself failed.
    #[error("{0}")]
    Runtime(String),
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) | CliError::Write { .. } => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
