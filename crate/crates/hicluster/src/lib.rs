//! File formats, the external-process cut finder, the experiment harness and
//! the command-line front end over [`hicluster_core`].

pub mod bench;
pub mod cli;
pub mod error;
pub mod formats;
pub mod plugin;
pub mod run;

pub use error::{CliError, CliResult};
