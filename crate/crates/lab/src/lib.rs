//! Configuration, stage persistence, report writers and the pipelines behind
//! the `repat` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod grammar;
pub mod report;
pub mod stagefile;

pub use config::{Config, Overrides};
pub use error::{LabError, Result};
