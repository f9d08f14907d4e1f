//! Command-line front end: validations, time evolution, photon
//! distributions, resonance maps and figure datasets.

pub mod commands;
pub mod config;
pub mod error;
pub mod figures;
pub mod svg;
pub mod table;

pub use error::{CliError, CliResult};
