//! Command-line front end: configuration parsing, subcommand dispatch, and
//! CSV emission for the nonlocal conservation law toolkit.

pub mod commands;
pub mod config;

pub use commands::{dispatch, EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE};
pub use config::{parse_config, ParseError, RunConfig};
