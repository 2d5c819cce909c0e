//! Experiment configs, the scenario runner and report output behind the `covertsim` binary.

pub mod config;
pub mod report;
pub mod resources;
pub mod scenarios;
pub mod stats;

pub use config::{Assertion, ExperimentConfig, Scenario};
pub use report::{
    judge, render_summary, replay_trial, run_experiment, write_outputs, AssertionResult, ExperimentReport,
    MetricSummary, Totals, TrialRecord, SCHEMA_VERSION,
};
pub use resources::{print_resource_table, resource_table, ResourceRow};
pub use scenarios::{pauli_expectation, random_pauli, run_trial, TrialOutcome, BAD_FIDELITY};
pub use stats::{wilson_interval, Rate, WILSON_Z};
