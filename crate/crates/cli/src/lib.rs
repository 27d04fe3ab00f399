//! Command-line front end for `ctqd-core`: configuration files, sequence
//! resolution, parallel error scans and CSV output.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod report;
pub mod scan;
pub mod source;

use ctqd_core::error::BestFound;
use ctqd_core::{DesignError, FrameError, LinalgError, SimError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed or inconsistent configuration.
    #[error("config error: {0}")]
    Config(String),
    #[error("no solution: best objective {:e} at phases {:?}", best.objective, best.phases)]
    NoSolution { best: BestFound },
    #[error("scan point ({dx}, {dy}) failed: {source}")]
    Point { dx: f64, dy: f64, source: Box<CliError> },
    #[error(transparent)]
    Design(DesignError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Process exit code: 2 for configuration problems, 1 for everything
    /// that fails at run time.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Self::Io { path: path.as_ref().display().to_string(), source }
    }
}

impl From<DesignError> for CliError {
    fn from(e: DesignError) -> Self {
        match e {
            DesignError::NoSolution { best } => Self::NoSolution { best },
            DesignError::SpecError(_) | DesignError::DomainError(_) => Self::Config(e.to_string()),
            other => Self::Design(other),
        }
    }
}
