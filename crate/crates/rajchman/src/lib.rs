//! File formats, run configuration and subcommand drivers on top of
//! `rajchman-core`.

pub mod cache;
pub mod commands;
pub mod config;
pub mod decimal;
pub mod error;
pub mod formats;
pub mod spectrum_io;

pub use commands::{run, Outcome};
pub use config::{Command, RunConfig};
pub use error::{CliError, Status};
