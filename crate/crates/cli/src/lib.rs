//! Batch commands behind the `axicone` binary. Each command is a plain
//! function returning a typed outcome, so the same code drives the binary and
//! the acceptance suite.

pub mod analytic;
pub mod config;
pub mod corpus;
pub mod manifest;
pub mod solve;
pub mod verify;

use axicone::config::ConfigError;
use axicone::inequalities::InequalityError;
use axicone::io::SnapshotError;
use axicone::solver::SolverError;
use std::path::PathBuf;
use thiserror::Error;

pub use config::ConfigSource;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// `2` for usage, configuration and precondition errors, `1` otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Precondition(_) => 2,
            CliError::Solver(SolverError::Config(_) | SolverError::Geometry(_) | SolverError::Grid(_)) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<InequalityError> for CliError {
    fn from(e: InequalityError) -> Self {
        match e {
            InequalityError::Eigen(_) => CliError::Usage(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

/// Common part of every command outcome.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub pass: bool,
    pub output_dir: PathBuf,
    /// One line per check group, for the terminal.
    pub lines: Vec<String>,
    pub warnings: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.pass {
            0
        } else {
            1
        }
    }
}
