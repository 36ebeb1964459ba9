//! Check records, CSV output and exit codes.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        })
    }
}

/// One measured quantity against its bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub command: String,
    pub checks: Vec<Check>,
    pub config_hash: String,
    pub seed: u64,
    pub outputs: Vec<PathBuf>,
}

impl RunReport {
    pub fn new(command: &str, config_hash: String, seed: u64) -> Self {
        Self {
            command: command.into(),
            checks: Vec::new(),
            config_hash,
            seed,
            outputs: Vec::new(),
        }
    }

    /// Passes when `value <= bound`.
    pub fn at_most(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        let status = if value <= bound { Status::Pass } else { Status::Fail };
        self.push(name, value, bound, status);
    }

    /// Passes when `value >= bound`.
    pub fn at_least(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        let status = if value >= bound { Status::Pass } else { Status::Fail };
        self.push(name, value, bound, status);
    }

    pub fn skip(&mut self, name: impl Into<String>, bound: f64) {
        self.push(name, f64::NAN, bound, Status::Skip);
    }

    fn push(&mut self, name: impl Into<String>, value: f64, bound: f64, status: Status) {
        self.checks.push(Check {
            name: name.into(),
            value,
            bound,
            status,
        });
    }

    pub fn count(&self, s: Status) -> usize {
        self.checks.iter().filter(|c| c.status == s).count()
    }

    pub fn all_pass(&self) -> bool {
        self.count(Status::Fail) == 0
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: {} passed, {} failed, {} skipped (config {}, seed {})",
            self.command,
            self.count(Status::Pass),
            self.count(Status::Fail),
            self.count(Status::Skip),
            &self.config_hash[..12],
            self.seed
        )
    }

    pub fn write_csv(&mut self, dir: &Path) -> Result<()> {
        let path = dir.join("report.csv");
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["command", "check", "value", "bound", "status", "config_hash", "seed"])?;
        for c in &self.checks {
            w.write_record([
                self.command.clone(),
                c.name.clone(),
                format!("{:.9e}", c.value),
                format!("{:.3e}", c.bound),
                c.status.to_string(),
                self.config_hash.clone(),
                self.seed.to_string(),
            ])?;
        }
        w.flush()?;
        self.outputs.push(path);
        Ok(())
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            0
        } else {
            1
        }
    }
}

/// Exit code for a command that failed before finishing its checks.
pub fn error_exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}
