//! IO, configuration, synthetic data generation, and the command-line
//! pipeline around `botdna-core`.

pub mod config;
pub mod error;
pub mod events;
pub mod formats;
pub mod ingest;
pub mod pipeline;
pub mod sentiment;
pub mod synth;

pub use crate::error::{CliError, Result};
