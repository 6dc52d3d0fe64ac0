//! Scenario configuration, execution and output for the `simulate` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod run;

pub use config::{parse_config, parse_layered, Mode, ScenarioConfig};
pub use error::{CliError, ConfigError};
pub use run::{run_scenario, sweep, RunSummary, SweepSpec};
