//! Batch front-end for the `modelcheck` library: run configs, command
//! pipelines and report bundles.

pub mod config;
pub mod output;
pub mod run;
pub mod svg;

pub use config::{Command, RunConfig};
pub use run::{run, ReportBundle};
