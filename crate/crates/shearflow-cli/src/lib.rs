//! Batch front end for the shearflow toolkit: configuration, ε sweeps,
//! convergence fits, acceptance suites and report files.

pub mod case;
pub mod config;
pub mod error;
pub mod fit;
pub mod report;
pub mod suites;
pub mod verification;

pub use case::{run_case, CaseOutput, CaseSummary};
pub use config::{RunConfig, Suite};
pub use error::CliError;
pub use fit::{fit_slope, FitError, SlopeFit, SlopeVerdict};
pub use suites::{convergence_report, run_acceptance, run_sweep, Acceptance, ConvergenceReport, CriterionResult};
