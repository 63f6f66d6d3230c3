//! Configuration loading, validation, reference execution and report output.

mod config;
mod diagnostic;
mod emit;
mod run;
mod workload;

pub use config::{validate_config, SimConfig};
pub use diagnostic::Diagnostic;
pub use emit::{emit_report, replay, report_csv, ReportDocument, RunManifest, REPORT_FILES};
pub use run::{execute, run_reference, Accuracy, RunOutcome};
pub use workload::{Workload, WorkloadPaths};
