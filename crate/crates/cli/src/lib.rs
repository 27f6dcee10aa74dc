//! Configuration loading and the `measure`, `certify`, `simulate`, `sync` and
//! `periodic` pipelines behind the `halanay-cert` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run, Command, Options, Outcome};
pub use config::Config;
pub use error::{CliError, CliResult};
