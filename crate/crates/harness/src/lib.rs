//! Experiment harness for lexicographic matchings on sparse random graphs.

pub mod check;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod record;
pub mod stats;

pub use config::{Experiment, ExperimentConfig, Format};
pub use error::{HarnessError, Result};
pub use record::{Metric, ResultRecord};
