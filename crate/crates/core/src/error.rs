use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum BanditError {
    #[error("arm index {arm} out of range for an instance with {num_arms} arms")]
    ArmOutOfRange { arm: usize, num_arms: usize },

    #[error("the maximal mean {mean} is attained by more than one arm ({first} and {second})")]
    NonUniqueOptimum {
        mean: f64,
        first: usize,
        second: usize,
    },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("budget {budget} too small: {reason}")]
    BudgetTooSmall { budget: u64, reason: String },

    #[error("policy has already stopped")]
    Stopped,

    #[error("recommendation not available yet: {0}")]
    Incomplete(String),

    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("no arm passed the selection filter: {0}")]
    EmptySelection(String),

    #[error("kinase {0:?} not found in the table header")]
    UnknownKinase(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(String),
}

impl BanditError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BanditError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, BanditError>;
