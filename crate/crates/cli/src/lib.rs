//! Command-line front end: configuration files, CSV and provenance output,
//! seed sweeps and comparison plots.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod plots;

pub use commands::{execute, Cli};
pub use config::parse_config;
pub use error::CliError;
pub use output::{csv_bytes, emit_csv, RunProvenance};
pub use plots::{emit_plots, ProtocolRuns};
