//! File formats, the staged pipeline runner and random suites for
//! `lozvol-core`. The `lozvol` binary is a thin command-line layer over
//! this library.

pub mod format;
pub mod report;
pub mod runner;
pub mod suite;

pub use format::{parse_instance, Instance, NormSpec};
pub use report::RunReport;
pub use runner::{run_pipeline, run_suite, summary_csv, RunOptions, Stage};
pub use suite::{generate_suite, SuiteKind, SuiteSpec};
