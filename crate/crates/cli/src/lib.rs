//! Command-line front end: JSON configuration, run orchestration and
//! deterministic artifact output.

pub mod config;
mod error;
pub mod output;
pub mod run;
pub mod sweep;

pub use error::{CliError, Result};
