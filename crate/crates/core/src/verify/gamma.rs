//! Empirical estimate of the uniform definiteness constant `γ^(k)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::{sample_rng, sample_sigma_slice};
use crate::scalarform::tilde_coeff_matrix;
use crate::sympoly::{GammaSchedule, Spectrum};
use crate::{Error, Result};

/// Corner patterns `{γ_k, 1}ⁿ` are added to the random samples up to this `n`.
const CORNER_MAX_N: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaEstimate {
    /// `min −λ_max(M(λ))` over everything visited. An upper bound on `γ^(k)`.
    pub value: f64,
    /// The minimizing `λ`, normalized to the unit sphere.
    pub argmin: Vec<f64>,
    /// Number of spectra evaluated, refinement included.
    pub evaluations: usize,
}

/// `−λ_max` of the reduced form at `λ`.
pub fn definiteness_margin(k: usize, lambda: &[f64]) -> Result<f64> {
    let s = Spectrum::new(lambda.to_vec())?;
    Ok(-tilde_coeff_matrix(k, &s)?.max_eigenvalue()?)
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / norm).collect()
}

/// Samples `budget` points of `Σ_(γ_k)` (plus the corners of the box
/// `[γ_k, 1]ⁿ` for small `n`), then refines the best one by coordinate
/// descent inside the box. The form is 0-homogeneous in `λ`, so the box
/// covers every ray of the cone.
pub fn estimate_gamma_uniform(sched: &GammaSchedule, budget: usize, seed: u64) -> Result<GammaEstimate> {
    let (n, k, g) = (sched.n, sched.k, sched.gamma_k);
    let mut candidates: Vec<Vec<f64>> =
        (0..budget as u64).map(|i| sample_sigma_slice(sched, &mut sample_rng(seed, i)).into_vec()).collect();
    if n <= CORNER_MAX_N {
        for mask in 1u32..(1 << n) {
            candidates.push((0..n).map(|i| if mask >> i & 1 == 1 { 1.0 } else { g }).collect());
        }
    }
    let values: Vec<f64> = candidates.par_iter().map(|c| definiteness_margin(k, c)).collect::<Result<_>>()?;
    let mut evaluations = values.len();
    let mut best_val = f64::INFINITY;
    let mut best_idx = None;
    for (i, &v) in values.iter().enumerate() {
        if v < best_val {
            best_val = v;
            best_idx = Some(i);
        }
    }
    let mut x: Vec<f64> = match best_idx {
        Some(i) => {
            let c = &candidates[i];
            let m = c.iter().copied().fold(0.0, f64::max);
            c.iter().map(|v| v / m).collect()
        }
        None => {
            evaluations += 1;
            best_val = definiteness_margin(k, &vec![1.0; n])?;
            vec![1.0; n]
        }
    };

    let width = 1.0 - g;
    for step in [0.25, 0.1, 0.03, 0.01, 0.003, 0.001] {
        let h = step * width;
        for _ in 0..50 {
            let mut improved = false;
            for i in 0..n {
                for dir in [1.0, -1.0] {
                    let old = x[i];
                    let new = (old + dir * h).clamp(g, 1.0);
                    if new == old {
                        continue;
                    }
                    x[i] = new;
                    let v = definiteness_margin(k, &x)?;
                    evaluations += 1;
                    if v < best_val {
                        best_val = v;
                        improved = true;
                    } else {
                        x[i] = old;
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
    let argmin = normalized(&x);
    if !(best_val > 0.0) {
        return Err(Error::NonPositiveEstimate { value: best_val, lambda: argmin });
    }
    Ok(GammaEstimate { value: best_val, argmin, evaluations })
}
