use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("config error: {0}")]
    Config(String),
    #[error("{}: missing column {column:?}", path.display())]
    Schema { path: PathBuf, column: String },
    #[error("{}: {message}", path.display())]
    Dataset { path: PathBuf, message: String },
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("plot error: {0}")]
    Plot(String),
    #[error(transparent)]
    Core(#[from] gdro_core::Error),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    /// Process exit code: 2 for bad configuration or input files, 3 for
    /// failures while running or writing results.
    pub fn exit_code(&self) -> i32 {
        use gdro_core::Error as E;
        match self {
            HarnessError::Config(_)
            | HarnessError::Schema { .. }
            | HarnessError::Dataset { .. }
            | HarnessError::Parse { .. } => 2,
            HarnessError::Core(E::InvalidArgument(_) | E::Config(_) | E::UnsupportedDimension { .. }) => 2,
            HarnessError::Io { .. } | HarnessError::Plot(_) => 3,
            HarnessError::Core(_) => 3,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
