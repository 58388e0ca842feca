//! Orchestration behind the `hetsol` binary: configuration, the identity
//! suites, the subcommands and their reports.

pub mod commands;
pub mod config;
pub mod report;
pub mod samples;
pub mod suites;

pub use config::SuiteConfig;
pub use report::{Check, Record, Report};
