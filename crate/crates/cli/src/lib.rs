//! Scenario files, experiment runs, sweeps and certificate verification for
//! the `cosserat` command.

pub mod commands;
pub mod error;
pub mod output;
pub mod scenario;
pub mod sweep;

pub use error::{CliError, CliResult};
