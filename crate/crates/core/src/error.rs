use std::path::PathBuf;

use crate::types::{TaskId, WorkerId};

/// Every fallible operation in the crate returns this.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: `{field}` {reason}")]
    Config { field: &'static str, reason: String },

    #[error("failed to parse config {path}: {source}")]
    ConfigParse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },

    #[error("worker {0} has no pulls; its UCB index is undefined")]
    UndefinedProfile(WorkerId),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no ground truth recorded for task {task} in round {round}")]
    MissingGroundTruth { task: TaskId, round: u32 },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("run never reached an exploitation round")]
    NoExploitationRound,

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
