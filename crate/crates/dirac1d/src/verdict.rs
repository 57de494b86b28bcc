//! Pass/fail records for inequality checks.
//!
//! Every check reports its observed margin together with the tolerance it
//! was judged against; checks whose hypotheses do not hold (large-data
//! runs) are marked not-applicable rather than failed.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub status: Status,
    /// Worst observed value of the checked quantity.
    pub observed: f64,
    /// The bound it was compared against at the worst record.
    pub bound: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Verdict {
    /// Pass iff `observed <= bound + tolerance`.
    pub fn upper(name: &str, observed: f64, bound: f64, tolerance: f64, detail: String) -> Verdict {
        let status = if observed <= bound + tolerance { Status::Pass } else { Status::Fail };
        Verdict { name: name.into(), status, observed, bound, tolerance, detail }
    }

    /// Pass iff `observed >= bound - tolerance` (residual-style check).
    pub fn lower(name: &str, observed: f64, bound: f64, tolerance: f64, detail: String) -> Verdict {
        let status = if observed >= bound - tolerance { Status::Pass } else { Status::Fail };
        Verdict { name: name.into(), status, observed, bound, tolerance, detail }
    }

    pub fn not_applicable(name: &str, detail: String) -> Verdict {
        Verdict {
            name: name.into(),
            status: Status::NotApplicable,
            observed: f64::NAN,
            bound: f64::NAN,
            tolerance: f64::NAN,
            detail,
        }
    }

    pub fn is_failure(&self) -> bool {
        self.status == Status::Fail
    }
}

/// Tally of a verdict list.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Counts {
    pub passes: usize,
    pub failures: usize,
    pub not_applicable: usize,
}

pub fn count(verdicts: &[Verdict]) -> Counts {
    let mut c = Counts { passes: 0, failures: 0, not_applicable: 0 };
    for v in verdicts {
        match v.status {
            Status::Pass => c.passes += 1,
            Status::Fail => c.failures += 1,
            Status::NotApplicable => c.not_applicable += 1,
        }
    }
    c
}
