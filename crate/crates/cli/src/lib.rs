//! Configuration and experiment drivers for the `bubble-bands` binary.

use std::path::PathBuf;

use thiserror::Error;

pub mod config;
pub mod run;

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{}: {1}", .0.display())]
    Io(PathBuf, std::io::Error),
    #[error("computation failed at {0}")]
    Compute(String),
}

impl CliError {
    /// Process exit code: 2 for usage errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(..) | CliError::Compute(_) => 1,
        }
    }
}
