use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Numerical(#[from] anderson_core::error::Error),

    #[error("replay mismatch in {0} file(s): {1}")]
    ReplayMismatch(usize, String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use anderson_core::error::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(E::InvalidSpec(_) | E::InvalidGrid(_)) => 2,
            CliError::Numerical(_) | CliError::ReplayMismatch(..) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
