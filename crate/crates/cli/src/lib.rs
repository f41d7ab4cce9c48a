//! Experiment harness behind the `spotmin` command-line interface:
//! spec-file parsing and the simulation/calibration/estimation runners.

pub mod experiments;
pub mod specfile;

use std::fmt;

/// Harness errors, split by exit code: validation problems (bad spec or
/// arguments, exit 2) versus runtime failures (exit 1).
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid specification: {m}"),
            CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<spotmin::Error> for CliError {
    fn from(e: spotmin::Error) -> Self {
        match e {
            spotmin::Error::InvalidConfig(_)
            | spotmin::Error::InvalidPartition(_)
            | spotmin::Error::Parse(_) => CliError::Validation(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}
