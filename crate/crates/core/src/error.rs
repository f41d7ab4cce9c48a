use thiserror::Error;

/// Errors produced by simulation, partitioning and estimation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("tau must lie in (0, 1], got {0}")]
    TauOutOfRange(f64),

    #[error("empty estimation window at tau = {tau}")]
    EmptyWindow { tau: f64 },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
