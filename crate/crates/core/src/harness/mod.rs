//! Experiment configuration, seeded batches, scaling fits and reports.

mod config;
mod fit;
mod report;
mod run;

pub use config::{Axis, ExperimentConfig, Format, Method, RunParams, Sweep};
pub use fit::{axis_value, log_log_fit, scaling_fit, Fit, LedgerField};
pub use report::{emit_report, read_csv, read_json, render, write_csv, write_json, ReportRow, CSV_COLUMNS};
pub use run::{run_experiment, run_experiment_with_threads, run_single};
