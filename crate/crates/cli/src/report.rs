//! Line-delimited JSON reports. Each line is one object whose `record` field
//! names its kind; the first line is always the header.

use std::io::{self, Write};

use serde::Serialize;

use crate::config::JobConfig;

/// Bumped whenever a record changes shape.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Record<'a, T: Serialize> {
    record: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

#[derive(Serialize)]
struct Versions {
    tool: &'static str,
    library: &'static str,
}

#[derive(Serialize)]
struct Tolerances {
    /// Relative slack for margin and bound comparisons, `2^-(P/2)`.
    relative: String,
    /// Slack on `ln|z|` for closed-disk membership, also `2^-(P/2)`.
    disk_membership: String,
}

#[derive(Serialize)]
struct Header<'a> {
    schema: u32,
    versions: Versions,
    precision: u32,
    tolerances: Tolerances,
    config: &'a JobConfig,
}

pub struct ReportWriter<W: Write> {
    out: W,
}

impl<W: Write> ReportWriter<W> {
    pub fn new(out: W) -> Self {
        ReportWriter { out }
    }

    /// Writes one record and flushes, so a run cut short leaves whole lines.
    pub fn emit<T: Serialize>(&mut self, record: &str, body: &T) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, &Record { record, body })?;
        self.out.write_all(b"\n")?;
        self.out.flush()
    }

    pub fn header(&mut self, config: &JobConfig) -> io::Result<()> {
        let prec = config.resolved_precision;
        let tol = format!("2^-{}", prec / 2);
        self.emit(
            "header",
            &Header {
                schema: SCHEMA_VERSION,
                versions: Versions { tool: env!("CARGO_PKG_VERSION"), library: satmodel::VERSION },
                precision: prec,
                tolerances: Tolerances { relative: tol.clone(), disk_membership: tol },
                config,
            },
        )
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}
