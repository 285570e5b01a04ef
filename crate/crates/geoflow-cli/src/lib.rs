//! Experiment runner wrapping the curve evolution library.
//!
//! Each subcommand reads an experiment configuration, drives the solvers
//! in [`geoflow_core`], and writes diagnostics as CSV and JSON. Failures
//! are classified so scripts can branch on the exit code: 2 for anything
//! wrong with inputs, 3 for a solver that died mid-run, 4 for a run that
//! finished but broke an invariant it was supposed to keep.

pub mod check;
pub mod compare;
pub mod config;
pub mod initial;
pub mod io;
pub mod run;
pub mod sweep;

use geoflow_core::{FlowError, InvalidInput};

/// Command failure, carrying the process exit code class.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unusable configuration or input file.
    #[error("{0}")]
    Config(String),
    /// A solver aborted before reaching the requested horizon.
    #[error("{0}")]
    Solver(String),
    /// The run completed but violated a monitored invariant.
    #[error("{0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Invariant(_) => 4,
        }
    }

    /// Stable label used in sweep indexes and summaries.
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config_error",
            CliError::Solver(_) => "solver_error",
            CliError::Invariant(_) => "invariant_violation",
        }
    }
}

impl From<InvalidInput> for CliError {
    fn from(e: InvalidInput) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        CliError::Solver(e.to_string())
    }
}
