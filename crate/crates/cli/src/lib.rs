//! Batch front end for `infreg-core`: job files in, CSV out.

pub mod config;
pub mod run;

pub use config::{parse_config, print_config, Command, ConfigError, JobConfig};
pub use run::{run, CliError, Outcome};
