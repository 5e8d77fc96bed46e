//! Experiment runner for the `hyperlab` library.
//!
//! Each command turns a validated [`ExperimentConfig`] into a [`Table`] that
//! is written as CSV or JSON. Output is a pure function of the configuration.

pub mod commands;
pub mod config;
pub mod output;
pub mod selftest;

pub use commands::{run, run_to_bytes, Outcome, RunError};
pub use config::{Command, ConfigError, ExperimentConfig};
pub use output::{Cell, Table};
