//! Experiment runner for the `cutlab` library: config files, seeded
//! campaigns, CSV and JSON-lines results with a content-hashed manifest, and
//! the oracle and invariant self-check suites.

// Validation writes `!(x >= 0.0)` on purpose: NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod config;
pub mod output;
pub mod run;

use std::fmt;

pub use config::{ExperimentConfig, ExperimentKind};
pub use output::{ResultRow, RunOutput};
pub use run::{run_experiment, verify_config};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const INVARIANT: i32 = 3;
    pub const RESOURCE: i32 = 4;
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(cutlab::Error),
    Io(std::io::Error),
    /// A self-check suite found failures.
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use cutlab::Error as E;
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Core(E::InvariantViolation(_) | E::NotACutset) | CliError::Check(_) => exit::INVARIANT,
            CliError::Core(E::Capacity { .. }) | CliError::Io(_) => exit::RESOURCE,
            CliError::Core(_) => exit::CONFIG,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Check(m) => write!(f, "self-check failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<cutlab::Error> for CliError {
    fn from(e: cutlab::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}
