//! Output rows, the family growth flag, and the file writers.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::LabResult;

/// Bumped whenever a CSV column set changes.
pub const SCHEMA_VERSION: u32 = 1;

pub const GROWTH_NOTE: &str = "bounded = the largest ratio over the last quarter of the family exceeds the \
largest over the rest by less than growth_tol; a reporting heuristic, not a proof";

/// One `(d, p, member)` row of a scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub d: f64,
    pub p: f64,
    pub family: String,
    pub member_index: usize,
    pub ratio: f64,
    pub norm_num: f64,
    pub norm_den: f64,
    pub grid_n: usize,
    #[serde(rename = "grid_L")]
    pub grid_l: f64,
    pub quad_tol: f64,
    pub wall_ms: u64,
}

/// One named check of a verification suite.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub d: Option<f64>,
    pub lambda: Option<f64>,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl CheckRow {
    /// Passes when `value ≤ bound` (NaN fails).
    pub fn at_most(check: impl Into<String>, d: Option<f64>, lambda: Option<f64>, value: f64, bound: f64) -> Self {
        Self { check: check.into(), d, lambda, value, bound, pass: value <= bound }
    }

    /// Passes when `value ≥ bound` (NaN fails).
    pub fn at_least(check: impl Into<String>, d: Option<f64>, lambda: Option<f64>, value: f64, bound: f64) -> Self {
        Self { check: check.into(), d, lambda, value, bound, pass: value >= bound }
    }

    /// A boolean outcome, recorded as value 1/0 against bound 1.
    pub fn flag(check: impl Into<String>, d: Option<f64>, lambda: Option<f64>, ok: bool) -> Self {
        Self { check: check.into(), d, lambda, value: f64::from(u8::from(ok)), bound: 1.0, pass: ok }
    }
}

/// `max(r[i0..]) / max(r[..=i0]) - 1` with `i0 = ⌊3(N-1)/4⌋`. NaN if any
/// entry is not finite or the family has fewer than two members.
pub fn growth(ratios: &[f64]) -> f64 {
    if ratios.len() < 2 || ratios.iter().any(|r| !r.is_finite()) {
        return f64::NAN;
    }
    let i0 = 3 * (ratios.len() - 1) / 4;
    let head = ratios[..=i0].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tail = ratios[i0..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    tail / head - 1.0
}

/// Boundedness flag of one `(d, p, family)` series.
#[derive(Debug, Clone, Serialize)]
pub struct FamilyFlag {
    pub d: f64,
    pub p: f64,
    pub family: String,
    pub growth: f64,
    pub sup: f64,
    pub bounded: bool,
    pub expected_bounded: bool,
    pub matches: bool,
}

impl FamilyFlag {
    pub fn new(d: f64, p: f64, family: &str, ratios: &[f64], growth_tol: f64, expected_bounded: bool) -> Self {
        let g = growth(ratios);
        let bounded = g < growth_tol;
        let sup = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            d,
            p,
            family: family.to_string(),
            growth: g,
            sup,
            bounded,
            expected_bounded,
            matches: g.is_finite() && bounded == expected_bounded,
        }
    }
}

/// A row that could not be computed; scans keep going.
#[derive(Debug, Clone, Serialize)]
pub struct RowFailure {
    pub d: f64,
    pub p: Option<f64>,
    pub family: String,
    pub member_index: Option<usize>,
    pub error: String,
}

/// Everything a subcommand produced, before it is written.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub schema_version: u32,
    pub version: String,
    #[serde(skip)]
    pub rows: Vec<ScanRow>,
    pub checks: Vec<CheckRow>,
    pub flags: Vec<FamilyFlag>,
    pub failures: Vec<RowFailure>,
    /// Command-specific diagnostics and the config section that was run.
    pub details: serde_json::Map<String, serde_json::Value>,
    pub note: String,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            schema_version: SCHEMA_VERSION,
            version: env!("CARGO_PKG_VERSION").to_string(),
            rows: Vec::new(),
            checks: Vec::new(),
            flags: Vec::new(),
            failures: Vec::new(),
            details: serde_json::Map::new(),
            note: GROWTH_NOTE.to_string(),
        }
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) -> LabResult<()> {
        self.details.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    /// Check rows that failed, then flags that disagree with expectation.
    pub fn violations(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| {
                let mut s = c.check.clone();
                if let Some(d) = c.d {
                    s += &format!(" d={d}");
                }
                if let Some(l) = c.lambda {
                    s += &format!(" λ={l}");
                }
                format!("{s}: {:.3e} vs {:.3e}", c.value, c.bound)
            })
            .collect();
        out.extend(self.flags.iter().filter(|f| !f.matches).map(|f| {
            format!(
                "{} d={} p={}: growth {:.3e}, expected {}",
                f.family,
                f.d,
                f.p,
                f.growth,
                if f.expected_bounded { "bounded" } else { "growing" }
            )
        }));
        out
    }

    /// Writes `<dir>/<command>.csv` (scan rows, or the check table when there
    /// are none) and `<dir>/<command>.json`, which always carries the checks;
    /// returns both paths.
    pub fn write(&self, dir: &Path) -> LabResult<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{}.csv", self.command));
        let json_path = dir.join(format!("{}.json", self.command));
        let mut w = csv::Writer::from_path(&csv_path)?;
        if self.rows.is_empty() {
            if self.checks.is_empty() {
                w.write_record(["check", "d", "lambda", "value", "bound", "pass"])?;
            }
            for c in &self.checks {
                w.serialize(c)?;
            }
        } else {
            for r in &self.rows {
                w.serialize(r)?;
            }
        }
        w.flush()?;
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&json_path, text)?;
        Ok((csv_path, json_path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_uses_last_quarter() {
        assert_eq!(growth(&[1.0, 1.0, 1.0, 1.0, 1.0, 1.0]), 0.0);
        // N = 6: i0 = 3, head max over [0..=3], tail over [3..]
        assert!((growth(&[1.0, 1.0, 1.0, 1.0, 1.0, 2.0]) - 1.0).abs() < 1e-15);
        assert!(growth(&[2.0, 1.0, 1.0, 1.0, 1.0, 1.0]) < 0.0);
        assert!(growth(&[1.0, f64::NAN]).is_nan());
        assert!(growth(&[1.0]).is_nan());
    }

    #[test]
    fn flags_compare_with_expectation() {
        let f = FamilyFlag::new(3.0, 4.0, "x", &[1.0, 2.0, 4.0, 8.0], 0.05, false);
        assert!(!f.bounded && f.matches);
        let f = FamilyFlag::new(3.0, 2.0, "x", &[1.0, f64::NAN], 0.05, false);
        assert!(!f.matches);
    }

    #[test]
    fn csv_schema() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = Report::new("scan-test");
        r.rows.push(ScanRow {
            d: 3.0,
            p: 2.0,
            family: "dilate".into(),
            member_index: 0,
            ratio: 1.5,
            norm_num: 3.0,
            norm_den: 2.0,
            grid_n: 100,
            grid_l: 50.0,
            quad_tol: 1e-6,
            wall_ms: 0,
        });
        let (csv_path, _) = r.write(dir.path()).unwrap();
        let text = fs::read_to_string(csv_path).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "d,p,family,member_index,ratio,norm_num,norm_den,grid_n,grid_L,quad_tol,wall_ms"
        );
    }

    #[test]
    fn nan_fails_checks() {
        assert!(!CheckRow::at_most("x", None, None, f64::NAN, 1.0).pass);
        assert!(!CheckRow::at_least("x", None, None, f64::NAN, 1.0).pass);
    }
}
