//! Experiment driver: verification suites and `(d, p)` scans over test
//! families, written as CSV rows plus JSON metadata.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::path::PathBuf;

pub use commands::Command;
pub use config::LabConfig;
pub use error::{LabError, LabResult};
pub use report::Report;

/// Result of one subcommand run, after its files are written.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub csv: PathBuf,
    pub json: PathBuf,
}

impl Outcome {
    /// Exit code: 3 if any row failed numerically, 1 if a check or flag
    /// disagrees with its contract, 0 otherwise.
    pub fn exit_code(&self) -> i32 {
        if !self.report.failures.is_empty() {
            3
        } else if !self.report.violations().is_empty() {
            1
        } else {
            0
        }
    }
}

/// Validates `cfg`, runs `cmd` and writes `<out_dir>/<command>.{csv,json}`.
pub fn execute(cmd: Command, cfg: &LabConfig) -> LabResult<Outcome> {
    cfg.validate()?;
    let report = cmd.run(cfg)?;
    let (csv, json) = report.write(&cfg.out_dir)?;
    Ok(Outcome { report, csv, json })
}
