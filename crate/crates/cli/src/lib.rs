//! Experiment presets, configuration files and output writing for the ABF
//! simulator.

// `!(x > 0.0)` style checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;

pub use config::{parse_config, parse_str, ExperimentConfig, Preset};
pub use error::CliError;
pub use experiment::{run_experiment, Outcome, Report};
pub use output::write_report;
