//! Experiment harness for the `sfw` binary: reads an experiment file, runs
//! every (algorithm, seed) pair in parallel and writes plot-ready CSV traces.

pub mod config;
pub mod error;
pub mod run;
pub mod trace_csv;

pub use config::{iterations_for_epochs, ConstraintSpec, ExperimentSpec, Overrides};
pub use error::CliError;
pub use run::{run_experiment, ExperimentReport, RunReport};
pub use trace_csv::{emit_csv, load_csv, read_trace, write_trace};
