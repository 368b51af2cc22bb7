use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{value} is not a unit modulo {modulus} (gcd = {gcd})")]
    NotAUnit { value: i64, modulus: u64, gcd: u64 },

    #[error("domain restriction: {0}")]
    DomainRestriction(String),

    #[error("resource limit exceeded: {what} needs {requested}, cap is {cap}")]
    ResourceLimit {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u64, right: u64 },

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error(
        "evaluation paths disagree: {first} vs {second} differ by {diff:e}, allowed {allowed:e}"
    )]
    PathDisagreement {
        first: &'static str,
        second: &'static str,
        diff: f64,
        allowed: f64,
    },

    #[error("checks failed: {0}")]
    CheckFailed(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// Stable machine-readable category, used by the CLI on failure.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::NotAUnit { .. } => "not_a_unit",
            Error::DomainRestriction(_) => "domain_restriction",
            Error::ResourceLimit { .. } => "resource_limit",
            Error::ModulusMismatch { .. } => "modulus_mismatch",
            Error::InvalidWeight(_) => "invalid_weight",
            Error::PathDisagreement { .. } => "path_disagreement",
            Error::CheckFailed(_) => "check_failed",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Csv { .. } => 3,
            Error::PathDisagreement { .. } => 4,
            Error::ResourceLimit { .. } => 5,
            Error::CheckFailed(_) => 1,
            _ => 2,
        }
    }
}
