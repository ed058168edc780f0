//! Configuration, output and dispatch for the `bslab` binary.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{load_config, parse_config, Parsed, RunConfig};
pub use error::{CliError, Result};
pub use output::{Manifest, OutputEntry};
pub use run::{replay, run, Command};
