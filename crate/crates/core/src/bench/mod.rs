//! Experiment runner: resolves datasets for each task, runs every method
//! concurrently, scores against the held-out target labels and renders
//! CSV, JSON and Markdown tables.

mod config;
mod data;
mod report;
mod run;

pub use config::{apply_override, DigitsConfig, ExperimentConfig, Method, ReportFormat, Task};
pub use data::{cache_file_name, digits_dir, load_bundles, DATA_DIR_ENV};
pub use report::{
    collect_rows, emit_report, read_reference, render, render_csv, render_markdown, table_rows, TableRow, CSV_HEADER,
};
pub use run::{
    fit_method, run_experiment, run_on_bundles, run_one, AccuracyReport, CanonicalReport, RunResult, RunTiming,
    TracePoint, VERSION,
};
