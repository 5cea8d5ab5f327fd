//! Configuration, dispatch and JSON-lines reporting for the `satmodel`
//! command-line tool.

pub mod config;
pub mod job;
pub mod report;

pub use config::{load, parse_config, ConfigError, ConfigErrors, JobConfig, Overrides};
pub use job::{run, RunError};
pub use report::{ReportWriter, SCHEMA_VERSION};

/// Exit status for a configuration rejected before any computation.
pub const EXIT_INVALID: u8 = 1;
/// Exit status for a numerical or runtime failure during the job.
pub const EXIT_FAILED: u8 = 2;
