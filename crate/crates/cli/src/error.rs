use std::path::PathBuf;

use rccpabe_bench::BenchError;
use rccpabe_chain::ChainError;
use rccpabe_core::scheme::SchemeError;
use thiserror::Error;

/// Exit codes; denial is kept apart from every kind of error so scripts can
/// assert security outcomes.
pub mod exit {
    pub const FAILURE: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const DENIED: u8 = 3;
    pub const INTEGRITY: u8 = 4;
    pub const FORMAT: u8 = 5;
    pub const IO: u8 = 6;
    pub const CONFIG: u8 = 7;
}

#[derive(Debug, Error)]
pub enum CliError {
    /// Policy unsatisfied, keyword mismatch, revoked key or user, rejected
    /// credential.
    #[error("denied: {0}")]
    Denied(String),
    /// Tampered ledger, ciphertext or bundle.
    #[error("integrity failure: {0}")]
    Integrity(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config error: {0}")]
    Config(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => exit::FAILURE,
            CliError::Usage(_) => exit::USAGE,
            CliError::Denied(_) => exit::DENIED,
            CliError::Integrity(_) => exit::INTEGRITY,
            CliError::Format(_) => exit::FORMAT,
            CliError::Io { .. } => exit::IO,
            CliError::Config(_) => exit::CONFIG,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<SchemeError> for CliError {
    fn from(e: SchemeError) -> Self {
        let msg = e.to_string();
        match e {
            SchemeError::RegistrationDenied
            | SchemeError::Unauthorized
            | SchemeError::KeyMismatch
            | SchemeError::ForgedKey => CliError::Denied(msg),
            SchemeError::Tamper => CliError::Integrity(msg),
            SchemeError::Codec(_) | SchemeError::Structural(_) | SchemeError::Pairing(_) => CliError::Format(msg),
            SchemeError::Policy(_) | SchemeError::EmptyId | SchemeError::EmptyAttributes | SchemeError::EmptyKeyword => {
                CliError::Usage(msg)
            }
        }
    }
}

impl From<ChainError> for CliError {
    fn from(e: ChainError) -> Self {
        let msg = e.to_string();
        match e {
            ChainError::Denied(_) | ChainError::Rejected(_) => CliError::Denied(msg),
            ChainError::Dangling { .. } => CliError::Integrity(msg),
            ChainError::Format(_) => CliError::Format(msg),
            ChainError::Config(_) | ChainError::UnknownCall(_) => CliError::Config(msg),
            ChainError::Query(_) | ChainError::UnknownRegion(_) => CliError::Usage(msg),
            ChainError::Io(source) => CliError::Io { path: PathBuf::new(), source },
            ChainError::Scheme(s) => s.into(),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        let msg = e.to_string();
        match e {
            BenchError::Unknown { .. } | BenchError::NoFormula { .. } => CliError::Usage(msg),
            BenchError::Config(_) => CliError::Config(msg),
            BenchError::Chain(c) => c.into(),
            BenchError::Scheme(s) => s.into(),
            BenchError::Policy(_) => CliError::Usage(msg),
            BenchError::Pairing(_) => CliError::Failed(msg),
            BenchError::Csv(_) => CliError::Failed(msg),
            BenchError::Io(source) => CliError::Io { path: PathBuf::new(), source },
        }
    }
}
