//! Command-line front end: scenario loading, subcommands and CSV output.

pub mod commands;
pub mod format;
pub mod scenario;

use thiserror::Error;

pub use scenario::Scenario;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad scenario, bad flag or unreadable input. Exit code 2.
    #[error("{0}")]
    Config(String),
    /// The model could not produce a result. Exit code 3.
    #[error("{0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}

impl From<demandtier::ModelError> for CliError {
    fn from(e: demandtier::ModelError) -> Self {
        use demandtier::ModelError::*;
        match e {
            InvalidParameter { .. } | InvalidHorizon | InvalidPrice(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}
