//! Config ingestion, subcommand dispatch and artifact IO for `quasisol`.

pub mod app;
pub mod config;
pub mod io;

pub use app::{run, Cli, CliError, Command};
pub use config::{ConfigError, RunConfig};
