//! Library side of the `tailcert` command-line tool: the `verify` suite and
//! the shared error type with its exit-status mapping.

pub mod verify;

use thiserror::Error;

/// Exit status for a run where every claim held.
pub const EXIT_PASS: u8 = 0;
/// Exit status for a run where some claim failed.
pub const EXIT_VIOLATION: u8 = 1;
/// Exit status for configuration, resource and I/O errors.
pub const EXIT_ERROR: u8 = 2;

/// Seed used when neither `--seed` nor `TAILCERT_SEED` is given.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] tailcert::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(tailcert::Error::Invariant(_) | tailcert::Error::Certification(_)) => EXIT_VIOLATION,
            _ => EXIT_ERROR,
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
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}
