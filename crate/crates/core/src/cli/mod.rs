//! Configuration files, experiment runner and reports behind the
//! `gurevich-lab` binary.

pub mod cache;
pub mod config;
pub mod experiment;
pub mod report;
pub mod selftest;

pub use config::{parse_config, render, Built, ExperimentConfig, ExperimentKind, Format};
pub use experiment::{run_experiment, run_experiment_with, RunOptions};
pub use report::{emit_report, Report, Table, SCHEMA_VERSION};
pub use selftest::{selftest, SelftestCheck};

use crate::error::Error;

/// Process exit status for a failed command.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse(_) | Error::Validation(_) => 2,
        Error::Io(_) => 4,
        _ => 3,
    }
}
