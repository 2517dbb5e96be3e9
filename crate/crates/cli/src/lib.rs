//! Experiment driver for the inertial gradient method: TOML-configured runs,
//! parameter sweeps, rate studies and ODE comparisons, with CSV/JSON output.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;
pub mod monitors;

pub use commands::{
    cmd_ode, cmd_rates, cmd_run, cmd_sweep, execute_ode, execute_rates, execute_run, RunOutcome, RunReport,
};
pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
