//! Staged command-line pipeline for the rights-risk audit.

pub mod config;
pub mod manifest;
pub mod pipeline;

pub use config::{Overrides, RunConfig};
pub use manifest::{Stage, StageError};
pub use pipeline::{Pipeline, StageOutcome};
