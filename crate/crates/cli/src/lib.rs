//! Library side of the `frst-lab` command-line tool.

pub mod app;
pub mod error;
pub mod io;

pub use error::{CliError, Result};
