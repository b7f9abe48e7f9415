use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot load dataset {path}: {source}")]
    Dataset {
        path: PathBuf,
        #[source]
        source: sfw_core::Error,
    },

    #[error("cannot read config {path}: {msg}")]
    Config { path: PathBuf, msg: String },

    #[error("invalid experiment: {0}")]
    Spec(String),

    #[error("{algorithm} (seed {seed}) produced a non-finite value at iteration {iteration}")]
    NonFinite {
        algorithm: String,
        seed: u64,
        iteration: u64,
    },

    #[error("{algorithm} (seed {seed}) failed: {source}")]
    Solve {
        algorithm: String,
        seed: u64,
        #[source]
        source: sfw_core::Error,
    },

    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed trace csv: {0}")]
    Csv(String),
}

impl CliError {
    /// Process exit status: 2 for unreadable inputs, 3 for a non-finite
    /// abort, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Dataset { .. } | CliError::Config { .. } | CliError::Csv(_) => 2,
            CliError::NonFinite { .. } => 3,
            CliError::Spec(_) | CliError::Solve { .. } | CliError::Output { .. } => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
