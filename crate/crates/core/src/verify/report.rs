//! Suite reports and their JSON/CSV encodings.

use serde::{Deserialize, Serialize};

use super::ledger::ConstantsLedger;
use crate::sympoly::Branch;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteParams {
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    pub mu: f64,
    pub gamma_k: f64,
    pub branch: Branch,
}

/// Tally of one inequality across all samples.
///
/// Margins are `(lhs − rhs) / scale`; a sample violates the inequality when
/// its margin exceeds `tolerance`. Negative margins are slack.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub tolerance: f64,
    pub evaluated: usize,
    pub violations: usize,
    pub worst_margin: Option<f64>,
}

impl CheckSummary {
    pub fn new(name: &str, tolerance: f64) -> Self {
        Self { name: name.to_owned(), tolerance, evaluated: 0, violations: 0, worst_margin: None }
    }

    pub fn record(&mut self, margin: f64) {
        self.evaluated += 1;
        if !(margin <= self.tolerance) {
            self.violations += 1;
        }
        if margin.is_finite() {
            self.worst_margin = Some(self.worst_margin.map_or(margin, |w| w.max(margin)));
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub params: SuiteParams,
    pub ledger: ConstantsLedger,
    pub samples: usize,
    pub violations: usize,
    pub worst_margin: Option<f64>,
    pub seed: u64,
    /// Wall time, only filled in on request so that reports stay reproducible.
    pub wall_ms: Option<u64>,
    /// Whether `δ` lies within the range the estimates are proved for.
    pub precondition_met: bool,
    pub checks: Vec<CheckSummary>,
}

impl VerificationReport {
    pub(crate) fn finish(&mut self) {
        self.violations = self.checks.iter().map(|c| c.violations).sum();
        self.worst_margin = self
            .checks
            .iter()
            .filter_map(|c| c.worst_margin)
            .fold(None, |acc: Option<f64>, m| Some(acc.map_or(m, |a| a.max(m))));
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only finite floats")
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    suite: &'a str,
    n: usize,
    k: usize,
    delta: f64,
    mu: f64,
    gamma_k: f64,
    branch: &'a str,
    samples: usize,
    violations: usize,
    worst_margin: Option<f64>,
    seed: u64,
    wall_ms: Option<u64>,
    precondition_met: bool,
    gamma_k_uniform: f64,
    mu_k: f64,
    c4: f64,
    c8: f64,
    c9: f64,
    c10: f64,
    c12: f64,
    delta0: f64,
    delta1: f64,
    d: f64,
}

/// One CSV row per report, with a header line.
pub fn reports_to_csv(reports: &[VerificationReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        let l = &r.ledger;
        w.serialize(CsvRow {
            suite: &r.suite,
            n: r.params.n,
            k: r.params.k,
            delta: r.params.delta,
            mu: r.params.mu,
            gamma_k: r.params.gamma_k,
            branch: r.params.branch.as_str(),
            samples: r.samples,
            violations: r.violations,
            worst_margin: r.worst_margin,
            seed: r.seed,
            wall_ms: r.wall_ms,
            precondition_met: r.precondition_met,
            gamma_k_uniform: l.gamma_k_uniform,
            mu_k: l.mu_k,
            c4: l.c4,
            c8: l.c8,
            c9: l.c9,
            c10: l.c10,
            c12: l.c12,
            delta0: l.delta0,
            delta1: l.delta1,
            d: l.d,
        })
        .expect("in-memory CSV write");
    }
    if reports.is_empty() {
        return String::new();
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_summary_counts() {
        let mut c = CheckSummary::new("x", 1e-9);
        c.record(-0.5);
        c.record(2e-9);
        c.record(f64::NAN);
        assert_eq!(c.evaluated, 3);
        assert_eq!(c.violations, 2);
        assert_eq!(c.worst_margin, Some(2e-9));
    }
}
