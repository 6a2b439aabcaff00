//! Experiment configuration, Monte Carlo trials and report output.

pub mod config;
pub mod report;
pub mod trials;

pub use config::{ExperimentConfig, Format, Mode, PrefixSettings};
pub use report::{emit_report, ReportRow};
pub use trials::{prefix_convergence, run_trials, CellSummary, PrefixOutput, RunOutput, TrialRecord};
