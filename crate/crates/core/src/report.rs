//! Check reports shared by all verification suites.

use std::time::Instant;

use serde::Serialize;

use crate::error::FusionError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// Outcome of one identity check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub id: String,
    pub status: Status,
    pub max_residual: f64,
    pub coverage: String,
    pub ms: u64,
}

impl CheckReport {
    /// Pass iff the residual is below the bound.
    pub fn residual(id: &str, residual: f64, bound: f64, coverage: impl Into<String>) -> Self {
        let status = if residual.is_finite() && residual < bound { Status::Pass } else { Status::Fail };
        CheckReport { id: id.into(), status, max_residual: residual, coverage: coverage.into(), ms: 0 }
    }

    /// Pass iff `ok`; the residual field carries a diagnostic value.
    pub fn predicate(id: &str, ok: bool, value: f64, coverage: impl Into<String>) -> Self {
        let status = if ok { Status::Pass } else { Status::Fail };
        CheckReport { id: id.into(), status, max_residual: value, coverage: coverage.into(), ms: 0 }
    }

    pub fn skipped(id: &str, reason: impl Into<String>) -> Self {
        CheckReport { id: id.into(), status: Status::Skipped, max_residual: 0.0, coverage: reason.into(), ms: 0 }
    }

    /// A computation that errored: skipped when the error is a declared precondition
    /// failure, failed otherwise.
    pub fn from_error(id: &str, err: &FusionError) -> Self {
        match err {
            FusionError::BranchCollision { .. }
            | FusionError::MemoryBudget { .. }
            | FusionError::LevelsUnavailable(_)
            | FusionError::DegreeOverflow(..) => Self::skipped(id, err.to_string()),
            _ => CheckReport {
                id: id.into(),
                status: Status::Fail,
                max_residual: f64::INFINITY,
                coverage: err.to_string(),
                ms: 0,
            },
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }
}

/// Run a check body and stamp its wall time.
pub fn timed(f: impl FnOnce() -> CheckReport) -> CheckReport {
    let t = Instant::now();
    let mut r = f();
    r.ms = t.elapsed().as_millis() as u64;
    r
}

/// Run a fallible check body, mapping errors through `CheckReport::from_error`.
pub fn timed_result(id: &str, f: impl FnOnce() -> crate::Result<CheckReport>) -> CheckReport {
    timed(|| f().unwrap_or_else(|e| CheckReport::from_error(id, &e)))
}

#[derive(Clone, Debug, Default, Serialize, PartialEq, Eq)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
}

pub fn summarize(checks: &[CheckReport]) -> Summary {
    let mut s = Summary::default();
    for c in checks {
        match c.status {
            Status::Pass => s.pass += 1,
            Status::Fail => s.fail += 1,
            Status::Skipped => s.skipped += 1,
        }
    }
    s
}
