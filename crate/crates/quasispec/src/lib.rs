//! Command-line front end: configuration, scans, checks and the
//! verification suites.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod suites;

pub use commands::{execute, Command, Outcome};
pub use config::Config;
pub use error::CliError;
