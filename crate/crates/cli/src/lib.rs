//! Driver for the classical-representation toolkit: configuration layering,
//! parallel (m, n) tasks, deterministic CSV/JSON export with checksummed
//! manifests, and the validation suite.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod figures;
pub mod manifest;
pub mod output;
pub mod validate;

pub use cli::{run, Cli};
pub use error::{CliError, Result};
