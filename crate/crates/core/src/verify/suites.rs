//! Randomized inequality suites. Each sample draws from its own RNG stream
//! and sample outcomes are folded in index order, so reports do not depend
//! on the thread count.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::gamma::estimate_gamma_uniform;
use super::ledger::{build_ledger, ConstantsLedger};
use super::report::{CheckSummary, SuiteParams, VerificationReport};
use super::sampling::{derive_seed, random_skew, random_symmetric, sample_admissible, sample_rng, sample_sigma_slice};
use crate::linalg::{det_lu, sym_eigen, DenseMatrix};
use crate::matform::{
    conjugate_reduce, double_tilde, h_factors, minors, sigma_tilde_diag, AdmissibilityParams, MinorExpansion,
};
use crate::scalarform::{ratio_bounds_check, RATIO_TOL};
use crate::sympoly::{elementary, gamma_schedule, without, Branch, GammaSchedule, Spectrum};
use crate::{Error, Result};

/// Relative tolerance of the inequality suites.
pub const INEQUALITY_TOL: f64 = 1e-9;
/// Absolute slack of the structural bounds (all quantities are `O(δ)`).
pub const STRUCTURE_SLACK: f64 = 1e-12;
/// Relative slack of the minor positivity chain.
pub const MINOR_TOL: f64 = 1e-10;
/// `τ` grid for the intermediate point `ω^(τ)`.
pub const TAU_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

pub const SUITE_NAMES: [&str; 6] = ["prop31_34", "prop51", "dconcavity", "prop45", "structure", "minors"];

const GAMMA_SEED_TAG: u64 = 0x0067_616d_6d61;

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub schedule: GammaSchedule,
    pub delta: f64,
    /// Bound on `‖β‖`; the sampler rescales `ω` so that `μ ≤ δ λ_min(ω)`.
    pub mu: f64,
    pub samples: usize,
    pub seed: u64,
    /// Samples spent on estimating `γ^(k)` for the ledger.
    pub gamma_budget: usize,
    /// Skip the estimate and use this value instead.
    pub gamma_uniform: Option<f64>,
}

impl SuiteConfig {
    pub fn new(n: usize, k: usize, delta: f64, free_gamma: f64, samples: usize, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::BadDelta(delta));
        }
        Ok(Self {
            schedule: gamma_schedule(n, k, Some(free_gamma))?,
            delta,
            mu: 1.0,
            samples,
            seed,
            gamma_budget: 2000,
            gamma_uniform: None,
        })
    }

    pub fn n(&self) -> usize {
        self.schedule.n
    }

    pub fn k(&self) -> usize {
        self.schedule.k
    }

    fn params(&self) -> Result<AdmissibilityParams> {
        AdmissibilityParams::new(self.delta, self.mu, Some(self.schedule))
    }

    pub fn ledger(&self) -> Result<ConstantsLedger> {
        let g = match self.gamma_uniform {
            Some(g) => g,
            None => {
                estimate_gamma_uniform(&self.schedule, self.gamma_budget, derive_seed(self.seed, GAMMA_SEED_TAG))?.value
            }
        };
        build_ledger(self.n(), self.k(), self.delta, &self.schedule, g)
    }
}

/// `(lhs − rhs) / max(|lhs|, |rhs|)`, 0 when both vanish.
fn rel_margin(lhs: f64, rhs: f64) -> f64 {
    let s = lhs.abs().max(rhs.abs());
    if s == 0.0 {
        0.0
    } else {
        (lhs - rhs) / s
    }
}

type Outcome = Vec<(usize, f64)>;

/// Evaluates every sample in parallel and folds the margins in index order.
/// A sample whose evaluation fails counts as a violation of `evaluation`.
fn run_samples<F>(cfg: &SuiteConfig, checks: &[(&str, f64)], eval: F) -> Vec<CheckSummary>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Outcome> + Sync,
{
    let outcomes: Vec<Result<Outcome>> =
        (0..cfg.samples as u64).into_par_iter().map(|i| eval(&mut sample_rng(cfg.seed, i))).collect();
    let mut summaries: Vec<CheckSummary> = checks.iter().map(|(n, t)| CheckSummary::new(n, *t)).collect();
    let mut failures = CheckSummary::new("evaluation", 0.0);
    for o in outcomes {
        match o {
            Ok(margins) => {
                for (idx, m) in margins {
                    summaries[idx].record(m);
                }
                failures.evaluated += 1;
            }
            Err(_) => failures.record(f64::INFINITY),
        }
    }
    summaries.push(failures);
    summaries
}

fn report(
    cfg: &SuiteConfig,
    name: &str,
    ledger: ConstantsLedger,
    precondition_met: bool,
    checks: Vec<CheckSummary>,
) -> VerificationReport {
    let mut r = VerificationReport {
        suite: name.to_owned(),
        params: SuiteParams {
            n: cfg.n(),
            k: cfg.k(),
            delta: cfg.delta,
            mu: cfg.mu,
            gamma_k: cfg.schedule.gamma_k,
            branch: cfg.schedule.branch,
        },
        ledger,
        samples: cfg.samples,
        violations: 0,
        worst_margin: None,
        seed: cfg.seed,
        wall_ms: None,
        precondition_met,
        checks,
    };
    r.finish();
    r
}

/// Random symmetric `P` and skew `Q`, with `Q` rescaled by a log-uniform
/// factor in `[e⁻³, e³]` so that both regimes `|P| ≫ |Q|` and `|P| ≪ |Q|`
/// are explored.
fn random_pq(n: usize, rng: &mut ChaCha8Rng) -> (DenseMatrix, DenseMatrix) {
    let p = random_symmetric(n, rng);
    let q = random_skew(n, rng).scale(rng.random_range(-3.0f64..3.0).exp());
    (p, q)
}

/// Checks in the reduced frame `R̃ = D + β̃` with random `P̃`, `Q̃`:
/// `d²F(R̃,P̃) ≤ d²F(D,P̃) + C4δ²|P̃̃|²`, `d²F(R̃,Q̃) ≤ C8|Q̃̃|²`,
/// `H(R̃,P̃,Q̃) ≤ C9δ|P̃̃||Q̃̃|` and the combined bound on `d²F(R̃,P̃+Q̃)`.
pub fn suite_prop31_34(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let ledger = cfg.ledger()?;
    let params = cfg.params()?;
    let (n, k, delta) = (cfg.n(), cfg.k(), cfg.delta);
    let l = &ledger;
    let checks = [
        ("symmetric_perturbation", INEQUALITY_TOL),
        ("skew_bound", INEQUALITY_TOL),
        ("cross_term", INEQUALITY_TOL),
        ("combined", INEQUALITY_TOL),
    ];
    let summaries = run_samples(cfg, &checks, |rng| {
        let r = sample_admissible(n, &params, rng)?;
        let red = conjugate_reduce(r.r(), &DenseMatrix::zeros(n, n))?;
        let d = &red.eigenvalues;
        let (p, q) = random_pq(n, rng);
        let pp = double_tilde(d, &p)?.frobenius_norm();
        let qq = double_tilde(d, &q)?.frobenius_norm();
        let ex = MinorExpansion::new(&red.r_tilde, k)?;
        let ex_d = MinorExpansion::new(&DenseMatrix::diag(d), k)?;
        let base = ex_d.d2(&p)?;
        let d2 = delta * delta;
        let pq = p.add_scaled(&q, 1.0)?;
        Ok(vec![
            (0, rel_margin(ex.d2(&p)?, base + l.c4 * d2 * pp * pp)),
            (1, rel_margin(ex.d2(&q)?, l.c8 * qq * qq)),
            (2, rel_margin(ex.bilinear(&p, &q)?, l.c9 * delta * pp * qq)),
            (3, rel_margin(ex.d2(&pq)?, base + (l.c4 + 1.0) * d2 * pp * pp + l.c12 * qq * qq)),
        ])
    });
    Ok(report(cfg, "prop31_34", ledger, true, summaries))
}

/// `d²F(R,P) ≤ −C10|P̃̃|²` on the γ-restricted admissible set, and the
/// pair-sum lower bound `λ_ℓλ_m σ_{k−2}^{(ℓ,m)}/σ_k ≥ μ^(k)` for every pair.
pub fn suite_prop51(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let ledger = cfg.ledger()?;
    let params = cfg.params()?;
    let (n, k) = (cfg.n(), cfg.k());
    let (c10, mu_k) = (ledger.c10, ledger.mu_k);
    let checks = [("strict_concavity", INEQUALITY_TOL), ("pair_sum", INEQUALITY_TOL)];
    let summaries = run_samples(cfg, &checks, |rng| {
        let r = sample_admissible(n, &params, rng)?;
        let p = random_symmetric(n, rng);
        let red = conjugate_reduce(r.r(), &p)?;
        let pp = double_tilde(&red.eigenvalues, &red.m_tilde)?.frobenius_norm();
        let lhs = MinorExpansion::new(r.r(), k)?.d2(&p)?;
        let mut out = vec![(0, rel_margin(lhs, -c10 * pp * pp))];
        let lam = &red.eigenvalues;
        let s = elementary(k, lam);
        for a in 0..n {
            for b in a + 1..n {
                let pair = lam[a] * lam[b] * elementary(k - 2, &without(lam, &[a, b])) / s;
                out.push((1, rel_margin(mu_k, pair)));
            }
        }
        Ok(out)
    });
    let ok = cfg.delta <= ledger.delta0;
    Ok(report(cfg, "prop51", ledger, ok, summaries))
}

/// Taylor-type upper bounds for `F_k` between two admissible points
/// `R⁰, R¹`, with additive constant `d = 4nC12δ²` and with the `|Δβ|²`
/// term, plus `d²F(R⁰, M) ≤ C12|Q|²/λ_min²` for a random direction `M`.
pub fn suite_dconcavity(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let ledger = cfg.ledger()?;
    let params = cfg.params()?;
    let (n, k) = (cfg.n(), cfg.k());
    let (c12, d) = (ledger.c12, ledger.d);
    let checks =
        [("d_concavity", INEQUALITY_TOL), ("beta_increment", INEQUALITY_TOL), ("second_differential", INEQUALITY_TOL)];
    let summaries = run_samples(cfg, &checks, |rng| {
        let r0 = sample_admissible(n, &params, rng)?;
        let r1 = sample_admissible(n, &params, rng)?;
        let ex0 = MinorExpansion::new(r0.r(), k)?;
        let f1 = MinorExpansion::new(r1.r(), k)?.log_s_k();
        let dr = r1.r().add_scaled(r0.r(), -1.0)?;
        let lhs = f1 - ex0.log_s_k() - ex0.gradient().dot(&dr)?;

        let dbeta = r1.beta().add_scaled(r0.beta(), -1.0)?.frobenius_norm();
        let mut lam_tau = f64::NEG_INFINITY;
        for t in TAU_GRID {
            let w = r0.omega().scale(1.0 - t).add_scaled(r1.omega(), t)?;
            lam_tau = lam_tau.max(sym_eigen(&w)?.lambda_min());
        }

        let (p, q) = random_pq(n, rng);
        let m = p.add_scaled(&q, 1.0)?;
        let qn = q.frobenius_norm();
        let lmin = r0.lambda_min();
        Ok(vec![
            (0, rel_margin(lhs, d)),
            (1, rel_margin(lhs, c12 * dbeta * dbeta / (lam_tau * lam_tau))),
            (2, rel_margin(ex0.d2(&m)?, c12 * qn * qn / (lmin * lmin))),
        ])
    });
    let ok = cfg.delta <= ledger.delta1;
    Ok(report(cfg, "dconcavity", ledger, ok, summaries))
}

/// Ratio bounds `λ_n ≥ r_n ≥ r_j` and `λ_j ≥ r_j` on sorted points of
/// `Σ_(γ_k)`, `r_j = σ_k^{(j)}/σ_{k−1}^{(j)}`. Mid-range `k` only.
pub fn suite_prop45(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let (n, k) = (cfg.n(), cfg.k());
    if cfg.schedule.branch != Branch::Midrange {
        return Err(Error::BadBranch { n, k });
    }
    let ledger = cfg.ledger()?;
    let sched = cfg.schedule;
    let checks = [
        ("last_entry", RATIO_TOL),
        ("last_ratio_dominates", RATIO_TOL),
        ("entry_bounds", RATIO_TOL),
        ("supremum", RATIO_TOL),
    ];
    let summaries = run_samples(cfg, &checks, |rng| {
        let mut v = sample_sigma_slice(&sched, rng).into_vec();
        v.sort_by(|a, b| b.total_cmp(a));
        let m = ratio_bounds_check(k, &Spectrum::new(v)?)?.margins;
        Ok(vec![(0, m.last_entry), (1, m.last_ratio_dominates), (2, m.entry_bounds), (3, m.supremum)])
    });
    Ok(report(cfg, "prop45", ledger, true, summaries))
}

/// Bounds on the normalized skew blocks and the determinant factors of the
/// reduced matrix, over every minor of every size `2..=n`.
pub fn suite_structure(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let ledger = cfg.ledger()?;
    let params = cfg.params()?;
    let (n, delta) = (cfg.n(), cfg.delta);
    let checks = [
        ("sigma_norm", STRUCTURE_SLACK),
        ("k_norm", STRUCTURE_SLACK),
        ("h_lower", STRUCTURE_SLACK),
        ("h_upper", STRUCTURE_SLACK),
        ("h_aggregate", STRUCTURE_SLACK),
        ("g_factor", STRUCTURE_SLACK),
        ("h_spectral", STRUCTURE_SLACK),
    ];
    let summaries = run_samples(cfg, &checks, |rng| {
        let r = sample_admissible(n, &params, rng)?;
        let red = conjugate_reduce(r.r(), &DenseMatrix::zeros(n, n))?;
        let mut out = Vec::new();
        for size in 2..=n {
            let s = sigma_tilde_diag(&red.r_tilde, size, delta)?;
            out.push((0, s.max_sigma_norm() - s.sigma_bound));
            out.push((1, s.max_k_norm() - s.k_bound));
            let h = h_factors(&red.r_tilde, size, delta)?;
            for m in &h.minors {
                out.push((2, -m.h));
                out.push((3, m.h - h.bound));
                out.push((5, m.g.abs() - h.bound));
            }
            out.push((4, (h.h_k - h.bound).max(-h.h_k)));
            out.push((6, h.spectral_mismatch()));
        }
        Ok(out)
    });
    Ok(report(cfg, "structure", ledger, true, summaries))
}

/// `det R_S ≥ det ω_S + det β_S ≥ det ω_S > 0` and `λ_min(ω_S) ≥ λ_min(ω)`
/// for every principal minor. Determinant margins are scaled by `det ω_S`.
pub fn suite_minors(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let ledger = cfg.ledger()?;
    let params = cfg.params()?;
    let n = cfg.n();
    let checks = [
        ("det_sum", MINOR_TOL),
        ("det_beta_nonnegative", MINOR_TOL),
        ("det_omega_positive", MINOR_TOL),
        ("lambda_min_interlacing", MINOR_TOL),
    ];
    let summaries = run_samples(cfg, &checks, |rng| {
        let r = sample_admissible(n, &params, rng)?;
        let lmin = r.lambda_min();
        let mut out = Vec::new();
        for size in 1..=n {
            for idx in minors(n, size) {
                let ix = idx.indices();
                let dr = det_lu(&r.r().principal(ix))?;
                let w = r.omega().principal(ix);
                let dw = det_lu(&w)?;
                let db = det_lu(&r.beta().principal(ix))?;
                let scale = dw.abs().max(dr.abs());
                out.push((0, (dw + db - dr) / scale));
                out.push((1, -db / scale));
                out.push((2, if dw > 0.0 { -1.0 } else { 1.0 }));
                out.push((3, rel_margin(lmin, sym_eigen(&w)?.lambda_min())));
            }
        }
        Ok(out)
    });
    Ok(report(cfg, "minors", ledger, true, summaries))
}

/// Runs a suite by name.
pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<VerificationReport> {
    match name {
        "prop31_34" => suite_prop31_34(cfg),
        "prop51" => suite_prop51(cfg),
        "dconcavity" => suite_dconcavity(cfg),
        "prop45" => suite_prop45(cfg),
        "structure" => suite_structure(cfg),
        "minors" => suite_minors(cfg),
        other => Err(Error::BadRange(format!("unknown suite {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prop45_rejects_other_branches() {
        let cfg = SuiteConfig::new(5, 3, 0.05, 0.5, 10, 1).unwrap();
        assert_eq!(suite_prop45(&cfg).map(|_| ()), Err(Error::BadBranch { n: 5, k: 3 }));
    }

    #[test]
    fn small_runs_are_clean() {
        let mut cfg = SuiteConfig::new(4, 2, 0.05, 0.5, 20, 9).unwrap();
        cfg.gamma_budget = 200;
        for name in ["prop31_34", "structure", "minors"] {
            let r = run_suite(name, &cfg).unwrap();
            assert_eq!(r.violations, 0, "{name}: {:#?}", r.checks);
        }
    }
}
