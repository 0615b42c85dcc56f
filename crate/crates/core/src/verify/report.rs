use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::table::Table;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Measured and recorded; the claim does not assert it at this scale.
    Finding,
}

impl Status {
    pub fn is_failure(self) -> bool {
        self == Status::Fail
    }
}

impl Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Finding => "finding",
        })
    }
}

/// Outcome of one claim check.
///
/// `margin` is the worst slack observed against the claim's tolerance, so a
/// claim passes when it is nonnegative (strictly positive for claims of
/// strict inequality).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim_id: String,
    pub status: Status,
    pub margin: f64,
    pub scope: BTreeMap<String, String>,
    pub details: Vec<String>,
    /// CSV files written by [`VerificationReport::write_artifacts`], relative
    /// to the output directory.
    pub artifacts: Vec<String>,
    #[serde(skip)]
    pub tables: Vec<(String, Table)>,
}

impl VerificationReport {
    pub fn new(claim_id: &str) -> Self {
        Self {
            claim_id: claim_id.to_string(),
            status: Status::Pass,
            margin: f64::INFINITY,
            scope: BTreeMap::new(),
            details: Vec::new(),
            artifacts: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub fn scope(mut self, key: &str, value: impl Display) -> Self {
        self.scope.insert(key.to_string(), value.to_string());
        self
    }

    pub fn detail(&mut self, line: impl Into<String>) {
        self.details.push(line.into());
    }

    pub fn table(&mut self, name: &str, table: Table) {
        self.tables.push((name.to_string(), table));
    }

    /// Folds one asserted slack into the margin.
    pub fn slack(&mut self, margin: f64) {
        self.margin = self.margin.min(margin);
    }

    /// Sets the status from the margin; `strict` requires it to be positive.
    pub fn judge(mut self, strict: bool) -> Self {
        if !self.margin.is_finite() && self.margin > 0.0 {
            self.margin = f64::MAX;
        }
        let ok = if strict { self.margin > 0.0 } else { self.margin >= 0.0 };
        self.status = if ok { Status::Pass } else { Status::Fail };
        self
    }

    /// Like [`judge`](Self::judge), but a passing report becomes a finding
    /// when `finding` holds.
    pub fn judge_with_finding(self, strict: bool, finding: bool) -> Self {
        let mut r = self.judge(strict);
        if finding && r.status == Status::Pass {
            r.status = Status::Finding;
        }
        r
    }

    /// Marks the whole report as a finding regardless of the margin.
    pub fn as_finding(mut self) -> Self {
        if !self.margin.is_finite() {
            self.margin = f64::MAX;
        }
        self.status = Status::Finding;
        self
    }

    /// Writes the CSV tables into `dir` as `<claim_id>-<name>.csv` and
    /// records their names.
    pub fn write_artifacts(&mut self, dir: &Path) -> Result<()> {
        for (name, table) in &self.tables {
            let file = format!("{}-{name}.csv", self.claim_id);
            table.write(&dir.join(&file))?;
            if !self.artifacts.contains(&file) {
                self.artifacts.push(file);
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// One line for terminal summaries.
    pub fn summary_line(&self) -> String {
        let scope: Vec<String> = self.scope.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!(
            "{:<8} {:<18} margin={:<12.4e} {}",
            self.status,
            self.claim_id,
            self.margin,
            scope.join(" ")
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_follows_margin() {
        let mut r = VerificationReport::new("x").scope("n", 10);
        r.slack(0.5);
        r.slack(-0.0);
        assert_eq!(r.clone().judge(false).status, Status::Pass);
        assert_eq!(r.clone().judge(true).status, Status::Fail);
        r.slack(-1e-3);
        assert_eq!(r.judge(false).status, Status::Fail);
        let empty = VerificationReport::new("y").judge(true);
        assert_eq!(empty.status, Status::Pass);
        assert!(empty.to_json().contains("\"status\": \"pass\""));
    }

    #[test]
    fn findings_do_not_hide_failures() {
        let mut r = VerificationReport::new("z");
        r.slack(-1.0);
        assert_eq!(r.judge_with_finding(false, true).status, Status::Fail);
        let ok = VerificationReport::new("z").judge_with_finding(false, true);
        assert_eq!(ok.status, Status::Finding);
    }
}
