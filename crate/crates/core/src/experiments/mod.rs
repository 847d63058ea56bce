//! Config-driven experiments, their reports and the acceptance suite.

pub mod config;
pub mod criteria;
pub mod report;
pub mod run;

pub use config::{ExperimentConfig, ExperimentKind, SlopeCheck};
pub use criteria::{acceptance_criteria, evaluate, verify_all, verify_with, Criterion, Evaluation, Outcome};
pub use report::{
    CriterionResult, Environment, FitSummary, Measurement, Report, Timing, REPORT_SCHEMA, SCHEMA_VERSION,
};
pub use run::{run, ORTHOGONALITY_SUBSETS};
