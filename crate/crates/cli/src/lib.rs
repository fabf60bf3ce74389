//! Command-line experiments on top of `gamow-lab`.
//!
//! A run is described by a [`config::RunConfig`] (JSON, strict keys) plus
//! command-line overrides, and writes one CSV or JSON artifact.

pub mod config;
pub mod error;
pub mod experiments;

pub use config::{Experiment, Format, Resolved, RunConfig};
pub use error::CliError;
pub use experiments::{run, Artifact};
