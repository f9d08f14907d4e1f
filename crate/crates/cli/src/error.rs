use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("bad input: {0}")]
    Input(String),

    #[error(transparent)]
    Model(#[from] casimir_duomode::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("validation failed: {}", .0.join(", "))]
    ValidationFailed(Vec<String>),
}

impl CliError {
    /// 1 for a failed validation, 2 for anything wrong with the input.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ValidationFailed(_) => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
