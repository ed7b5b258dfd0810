//! Orchestration for the initial-noise difference pipeline: manifest ingestion,
//! extraction, training, evaluation, step sweeps, perturbations and synthetic
//! corpora.

pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod extract;
pub mod perturb;
pub mod robustness;
pub mod sweep;
pub mod synth;
pub mod train;

pub use config::PipelineConfig;
pub use error::{CliError, CliResult};
