//! File formats, presets, experiment harness and command line for
//! [`dpnash_core`].
//!
//! A run is described by a JSON [`config::RunConfig`]; the harness solves
//! the reference equilibrium, runs each seed in parallel and writes one CSV
//! per seed plus a summary. See the `dpnash` binary for the CLI.

// `!(x > 0.0)` style checks are meant to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod game_file;
pub mod harness;
pub mod presets;
pub mod summary;
pub mod topology;

pub use config::{load_config, parse_config, write_config, RunConfig, Scenario};
pub use error::{HarnessError, Result};
pub use harness::{run_experiment, ExperimentOutcome};
pub use summary::{density_report, summarize, SummaryTable};
