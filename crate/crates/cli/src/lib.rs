//! Orchestration for the `falldet` command: experiment configuration,
//! dataset preparation, hyperparameter studies, report tables, replay and
//! synthetic data generation.

pub mod config;
pub mod pipeline;
pub mod replay;
pub mod report;
pub mod synth;

pub use config::{Experiment, ExperimentConfig, Overrides};
