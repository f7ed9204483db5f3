//! Configuration, orchestration and file output for the grating sweep.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{CliError, Options};
pub use config::{ConfigError, RunConfig};
