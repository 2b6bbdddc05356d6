//! Configuration-driven experiments behind the `apsdet` binary.

pub mod config;
pub mod report;
pub mod run;

pub use config::{ConfigError, ExperimentConfig, Format, Kind};
pub use report::{Check, Item, Report};
pub use run::{run, RunError};
