//! Scenario runner for the shallow-water laboratory: TOML configuration,
//! seeded initial data, the four experiment scenarios, the Friedrichs
//! convergence study and the built-in quick check suite.

pub mod checks;
pub mod config;
pub mod data;
pub mod output;
pub mod scenarios;
pub mod study;

use thiserror::Error;

/// Version string written into every manifest.
pub const CODE_VERSION: &str = concat!("swlab ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error("blow-up at t = {time}: {reason}")]
    BlowUp { time: f64, reason: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] swlab_core::Error),
}

impl CliError {
    /// 0 pass, 1 assertion failure, 2 configuration error, 3 blow-up.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::BlowUp { .. } => 3,
            CliError::Core(swlab_core::Error::BlowUp { .. }) => 3,
            CliError::Assertion(_) | CliError::Io(_) | CliError::Core(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
