//! Experiment driver: config ingestion, the surface → moments → Padé →
//! predictor → verify pipeline, the content-hashed surface cache and the
//! CSV/JSON reports.

pub mod config;
pub mod output;
pub mod pipeline;

pub use config::{ExperimentConfig, Overrides};
pub use pipeline::{execute, Outcome, Stage};
