//! Experiment configuration, batch execution, reporting and the command-line front end.

pub mod batch;
pub mod cli;
pub mod config;
pub mod report;

pub use batch::{run_batch, run_single, scaling_study, BatchResult, RunOutcome, RunRecord, StatsSummary};
pub use config::ExperimentConfig;
pub use report::{landscape_profile, LandscapeReport, ProfileOptions};
