//! Command-line front end: resolves flags, an optional config file and
//! `CANBENCH_OUT` into a [`RunConfig`], then runs one command and records
//! a replayable manifest next to its outputs.

pub mod args;
pub mod config;
pub mod error;
pub mod run;

pub use args::Command;
pub use config::{parse_cli, parse_cli_with_env, parse_grid, DataSource, Precision, RunConfig, SweepKind};
pub use error::{CliError, CliResult};
pub use run::run_command;
