//! Command-line front end: CSV ingestion, moving windows, per-group
//! analysis with JSON and CSV reports, and synthetic data generation.

pub mod cli;
pub mod error;
pub mod ingest;
pub mod pipeline;
pub mod simulate;
pub mod window;

pub use cli::run;
pub use error::{CliError, CliResult};

// The guide's pipeline chapter runs as doctests.
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/pipeline.md")]
mod guide {}
