use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const PASS: u8 = 0;
    pub const SOFT_FAIL: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const SOLVER_ABORT: u8 = 3;
}

#[derive(Debug, Error)]
pub enum LabError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("snapshot {path}: {reason}")]
    Snapshot { path: PathBuf, reason: String },
    /// The library rejected its inputs.
    #[error(transparent)]
    Invalid(oldroyd_core::Error),
    /// A run stopped part way.
    #[error("solver aborted: {0}")]
    Solver(oldroyd_core::Error),
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Solver(_) => exit::SOLVER_ABORT,
            _ => exit::USAGE,
        }
    }
}
