//! Library surface of the enhdc binary: run/sweep configuration, the model
//! file format, and report construction. The bin target wires these to clap.

pub mod config;
pub mod model_file;
pub mod report;

use std::fmt;

/// Errors split by who has to fix them: exit code 2 for configuration and
/// input problems, 1 for internal failures.
#[derive(Debug)]
pub enum CliError {
    User(String),
    Internal(String),
}

impl CliError {
    pub fn user(message: String) -> Self {
        CliError::User(message)
    }

    pub fn internal(message: String) -> Self {
        CliError::Internal(message)
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::User(m) | CliError::Internal(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<enhdc_core::Error> for CliError {
    fn from(e: enhdc_core::Error) -> Self {
        // Core errors surface from configs and data files the user supplied.
        CliError::User(e.to_string())
    }
}
