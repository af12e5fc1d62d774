//! Configuration-driven experiment runner for the `sfbm` binary.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod report;

pub use config::{Document, Experiment, ExperimentConfig};
pub use error::CliError;
pub use experiments::{run_experiment, RunOutput};
pub use report::{Claim, RunReport, Status};
