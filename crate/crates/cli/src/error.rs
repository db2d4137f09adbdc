use std::path::PathBuf;

use ewpo_core::{ErrorClass, EwpoError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Data(String),

    #[error("cannot read `{}`: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write `{}`: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("rerun produced different results: {0}")]
    Mismatch(String),

    #[error(transparent)]
    Core(#[from] EwpoError),
}

impl CliError {
    /// 2 usage, 3 data, 4 numeric or degenerate input.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) | CliError::Read { .. } | CliError::Write { .. } => 3,
            CliError::Mismatch(_) => 4,
            CliError::Core(e) => match e.class() {
                ErrorClass::Usage => 2,
                ErrorClass::Data => 3,
                ErrorClass::Numeric => 4,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
