//! Command-line companion for `iontrap-core`: configuration, CSV/JSON
//! output, parameter sweeps and the verification suite.

pub mod config;
pub mod error;
pub mod run;
pub mod sweep;
pub mod verify;

pub use config::{Mode, NMax, RunConfig};
pub use error::CliError;
