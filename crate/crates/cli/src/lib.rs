//! Experiment harness: problem generation, reference solutions, benchmark
//! sweeps, and trace persistence for the monosplit solvers.

pub mod bench;
pub mod oracle;

use thiserror::Error;

/// Harness-level failures, each mapped to a process exit code:
/// configuration errors exit 1, divergence exits 2, oracle failures exit 3.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("trace serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),

    #[error("iteration diverged at k = {0}")]
    Divergence(usize),

    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io(_) | HarnessError::Serialize(_) => 1,
            HarnessError::Divergence(_) => 2,
            HarnessError::Oracle(_) => 3,
        }
    }
}

impl From<monosplit_core::OperatorError> for HarnessError {
    fn from(e: monosplit_core::OperatorError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<monosplit_core::SolveError> for HarnessError {
    fn from(e: monosplit_core::SolveError) -> Self {
        match e {
            monosplit_core::SolveError::Divergence { k, .. } => HarnessError::Divergence(k),
            other => HarnessError::Config(other.to_string()),
        }
    }
}
