//! File formats, reports and the command-line driver for `epgauge-core`.
//!
//! * [`io`]: corpus ingestion (CSV, TSV, JSONL) with rejection reports and
//!   canonical export.
//! * [`tables`]: share-table files.
//! * [`assess`], [`compare`]: cohort assessments and dual-method comparisons.
//! * [`render`]: CSV, canonical JSON and Markdown output.
//! * [`config`], [`cli`]: run configuration and subcommands.

pub mod assess;
pub mod cli;
pub mod compare;
pub mod config;
pub mod io;
pub mod render;
pub mod tables;

pub use assess::{assess_cohort, AssessOptions, CohortAssessment, LowNPolicy};
pub use compare::{compare_dual, table5_preset, table5_preset_with, CohortSide, DualMethodComparison, SideInput};
pub use render::{render, Precision, RenderFormat, Report};

use epgauge_core::Stratum;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Core(#[from] epgauge_core::Error),
    #[error("cohort `{label}` has no papers in stratum {stratum}")]
    EmptyCohort { label: String, stratum: Stratum },
    #[error("cohort `{label}` has {n} papers, below the minimum of {min}")]
    LowN { label: String, n: u64, min: u64 },
    #[error("cohort `{0}` has no lognormal fit")]
    MissingLognormal(String),
    #[error("cannot compare cohorts from different years ({a} and {b})")]
    YearMismatch { a: i32, b: i32 },
    #[error("invalid preset: {0}")]
    Preset(String),
    #[error("{0}")]
    Internal(String),
}
