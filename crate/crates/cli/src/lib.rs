//! Pipeline orchestration for the `dbgraph` binary.

pub mod app;
pub mod config;
pub mod error;
pub mod fetch;
pub mod manifest;
pub mod stages;

pub use app::run;
pub use config::{Overrides, PipelineConfig, Settings};
pub use error::{CliError, Result};
pub use stages::{Pipeline, Stage};
