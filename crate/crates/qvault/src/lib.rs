//! Std companion to `qvault-core`: text file formats (PPM, CSV, JSON) and the
//! pipelines behind the `qvault` command-line tool.
//!
//! Every artifact carries the run metadata (seed, scenario, grid, version) so
//! that two runs with the same configuration produce identical bytes.

pub mod format;
pub mod run;

pub use format::FormatError;
pub use run::{RunError, RunMeta};
