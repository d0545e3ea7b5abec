//! Experiment harness for `gdro-core`: CSV datasets, TOML experiment files,
//! parallel runs over solvers and seeds, metrics files and SVG plots.

pub mod config;
pub mod dataset;
pub mod env;
mod error;
pub mod experiment;
pub mod metrics;
pub mod plot;
mod svg;

pub use config::{EnvironmentSpec, ExperimentConfig, LowerBoundSpec, SolverSpec};
pub use dataset::{load_csv_dataset, Dataset, DatasetSpec};
pub use env::{Environment, Ideal};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, ExperimentReport, RunOutcome};
pub use plot::emit_plots;
