use std::io;

use diolab_core::Error as CoreError;
use thiserror::Error;

/// Errors surfaced by the command line, each mapped to an exit code.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    /// 2 for malformed or out-of-contract input, 3 for precision exhaustion, 4 for the memory budget, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Parse(_) | LabError::Core(CoreError::Parse(_) | CoreError::Invalid(_)) => 2,
            LabError::Core(CoreError::PrecisionExhausted(_)) => 3,
            LabError::Core(CoreError::MemoryBudget { .. }) => 4,
            _ => 1,
        }
    }
}

pub type LabResult<T> = Result<T, LabError>;
