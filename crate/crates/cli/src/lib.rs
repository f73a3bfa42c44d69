//! Experiment runner for `radial-lab`.
//!
//! A run reads an [`ExperimentConfig`], writes CSV and JSON artifacts into
//! the output directory and finishes with `manifest.json`: the config hash,
//! crate versions, per-experiment wall times and output checksums. CSV and
//! JSON bodies depend only on the config, so reruns are byte-identical;
//! timings live in the manifest alone.

pub mod config;
mod experiments;

use std::path::PathBuf;

pub use config::{ExperimentConfig, ExperimentKind, SetSource};
pub use experiments::{bounds_rows, run, Artifact, Manifest, RunReport};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid config at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("certification failed for {what}; certificate written to {}", file.display())]
    Certification { what: String, file: PathBuf },

    #[error(transparent)]
    Core(#[from] radial_lab::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
