//! Command-line front end for `curvature-lines`: run configuration,
//! exporters and the verification suite.

pub mod commands;
pub mod config;
pub mod error;
pub mod export;
pub mod verify;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
