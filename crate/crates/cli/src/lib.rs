//! Experiment runner: turns a JSON configuration into plot-ready CSV/JSON
//! tables and runs the validation suite.

pub mod commands;
pub mod config;
pub mod output;
pub mod validate;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Simulation(#[from] thinsim::Error),
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

impl CliError {
    /// Process exit code: 2 for usage, config and i/o problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Simulation(_) | CliError::Consistency(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
