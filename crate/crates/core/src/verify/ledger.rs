//! The chain of constants feeding the concavity estimates.

use serde::{Deserialize, Serialize};

use crate::sympoly::GammaSchedule;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsLedger {
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    pub gamma_k: f64,
    #[serde(rename = "C4")]
    pub c4: f64,
    #[serde(rename = "C6")]
    pub c6: f64,
    /// Taken equal to `C6`.
    #[serde(rename = "C7")]
    pub c7: f64,
    #[serde(rename = "C8")]
    pub c8: f64,
    #[serde(rename = "C9")]
    pub c9: f64,
    #[serde(rename = "C12")]
    pub c12: f64,
    pub mu_k: f64,
    /// Empirical upper bound on the uniform definiteness constant `γ^(k)`.
    pub gamma_k_uniform: f64,
    #[serde(rename = "C10")]
    pub c10: f64,
    #[serde(rename = "C11")]
    pub c11: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub d: f64,
    /// `C6` at `δ = 0`: `(2^⌊k/2⌋ − 1) + 2k`.
    #[serde(rename = "C6_at_zero")]
    pub c6_at_zero: f64,
}

/// Assembles every constant for `(n, k, δ)` from the schedule and an
/// estimate of `γ^(k)`. `δ` may be 0; the chain stays finite.
pub fn build_ledger(
    n: usize,
    k: usize,
    delta: f64,
    sched: &GammaSchedule,
    gamma_uniform: f64,
) -> Result<ConstantsLedger> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::BadDelta(delta));
    }
    if sched.n != n || sched.k != k {
        return Err(Error::BadRange(format!("schedule is for (n, k) = ({}, {})", sched.n, sched.k)));
    }
    let kf = k as f64;
    let nf = n as f64;
    let d2 = delta * delta;
    let pow = ((1u64 << (k / 2)) - 1) as f64;
    let c6 = pow + kf * d2 / (1.0 - d2).powi(2) + 2.0 * kf / (1.0 - d2);
    let c4 = 2.0 * c6 + 8.0;
    let c8 = 1.0 + c4 * delta;
    let c9 = 2.0 * kf * ((1.0 + (kf.sqrt() - 1.0) * d2) / (1.0 - d2).powi(2) + 1.0 / (1.0 + d2));
    let c12 = c9 * c9 + c8;
    let mu_k = (kf - 1.0) * kf / ((nf - 1.0) * nf) * sched.gamma_k.powi(k as i32);
    let c11 = gamma_uniform.min(mu_k);
    let delta0 = 0.5f64.min((c11 / (2.0 * c4)).sqrt());
    let delta1 = delta0.min((c11 / (c4 + 1.0)).sqrt());
    Ok(ConstantsLedger {
        n,
        k,
        delta,
        gamma_k: sched.gamma_k,
        c4,
        c6,
        c7: c6,
        c8,
        c9,
        c12,
        mu_k,
        gamma_k_uniform: gamma_uniform,
        c10: c11 / 2.0,
        c11,
        delta0,
        delta1,
        d: 4.0 * nf * c12 * d2,
        c6_at_zero: pow + 2.0 * kf,
    })
}
