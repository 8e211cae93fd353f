//! Configuration-driven experiments on top of `ddlab`: build a problem from a
//! key-value file, run a solver configuration, check it against the direct
//! solution and write residual histories, plots and comparison reports.

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use experiment::{direct_oracle, run_experiment, variants, Outcome, ReportRow};
