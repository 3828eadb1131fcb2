//! Command-line pipeline: lifting, labelling, training, ranking, evaluation
//! and experiment tables.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod report;

pub use commands::run;
pub use config::ExperimentConfig;
pub use error::{CliError, Result};
