//! File formats, parallel ensembles, run manifests and the command-line pipeline built
//! on `targetzone-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod manifest;
pub mod ticks;

pub use error::{CliError, Result};
