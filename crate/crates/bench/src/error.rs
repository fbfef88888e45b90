use std::path::PathBuf;

use dynmedian::ClusterError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invariant violated after update {update_index}:\n{report}")]
    Invariant { update_index: u64, report: String },
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}

impl BenchError {
    /// Process exit status: 1 configuration, 2 input or output, 3 invariant violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) | BenchError::Cluster(_) => 1,
            BenchError::Malformed { .. } | BenchError::Read { .. } | BenchError::Write { .. } => 2,
            BenchError::Invariant { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
