//! Random points of `Σ_(γ_k)` and of the admissible sets.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{op_norm, orthonormalize, DenseMatrix};
use crate::matform::{AdmissibilityParams, AugmentedMatrix};
use crate::sympoly::{GammaSchedule, Spectrum};
use crate::{Error, Result};

/// Generator for sample `index` of a run seeded with `seed`. Every sample
/// owns an independent ChaCha stream, so results do not depend on the order
/// in which samples are evaluated.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives an unrelated seed for a secondary purpose of the same run.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A point of `Σ_(γ_k)` on the unit sphere: one entry at the maximum, the
/// others uniform in `[γ_k, 1]` relative to it, in random order.
pub fn sample_sigma_slice(sched: &GammaSchedule, rng: &mut impl Rng) -> Spectrum {
    let mut v = Vec::with_capacity(sched.n);
    v.push(1.0);
    for _ in 1..sched.n {
        v.push(sched.gamma_k + (1.0 - sched.gamma_k) * rng.random::<f64>());
    }
    v.shuffle(rng);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    Spectrum::new(v.into_iter().map(|x| x / norm).collect()).expect("n ≥ 3 finite entries")
}

pub fn random_gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Random symmetric matrix with Gaussian entries.
pub fn random_symmetric(n: usize, rng: &mut impl Rng) -> DenseMatrix {
    random_gaussian(n, n, rng).symmetric_part().expect("square")
}

/// Random skew matrix with Gaussian entries.
pub fn random_skew(n: usize, rng: &mut impl Rng) -> DenseMatrix {
    random_gaussian(n, n, rng).skew_part().expect("square")
}

/// Haar-distributed orthogonal matrix (Gram–Schmidt on a Gaussian sample).
pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> DenseMatrix {
    loop {
        if let Ok(q) = orthonormalize(&random_gaussian(n, n, rng)) {
            return q;
        }
    }
}

/// A random `R = ω + β` with `‖β‖ ≤ μ ≤ δ λ_min(ω)` and, when a schedule is
/// given, `λ(ω) ∈ Σ_(γ_k)`.
///
/// The unit spectrum is scaled by a factor uniform in `[0.5, 2]`, raised if
/// needed so that `μ ≤ δ λ_min`. `‖β‖ = u μ` with `u` uniform in `[0, 1)`.
/// Without a schedule the spectrum is uniform in `[0.1, 1]`.
pub fn sample_admissible(n: usize, params: &AdmissibilityParams, rng: &mut impl Rng) -> Result<AugmentedMatrix> {
    if n < 2 {
        return Err(Error::InfeasibleParams(format!("n = {n} is too small")));
    }
    if params.mu > 0.0 && params.delta == 0.0 {
        return Err(Error::InfeasibleParams("δ = 0 forces μ = 0".into()));
    }
    let unit: Vec<f64> = match &params.schedule {
        Some(s) if s.n != n => return Err(Error::DimensionMismatch { expected: n, got: s.n }),
        Some(s) => sample_sigma_slice(s, rng).into_vec(),
        None => (0..n).map(|_| 0.1 + 0.9 * rng.random::<f64>()).collect(),
    };
    let unit_min = unit.iter().copied().fold(f64::INFINITY, f64::min);
    let mut scale = 0.5 + 1.5 * rng.random::<f64>();
    if params.mu > 0.0 {
        scale = scale.max(params.mu / (params.delta * unit_min));
    }
    let lambda: Vec<f64> = unit.iter().map(|x| x * scale).collect();

    let q = random_orthogonal(n, rng);
    let omega = q.matmul(&DenseMatrix::diag(&lambda))?.matmul(&q.transpose())?.symmetric_part()?;

    let mut beta = DenseMatrix::zeros(n, n);
    if params.mu > 0.0 {
        let b = random_skew(n, rng);
        let u: f64 = rng.random();
        let norm = op_norm(&b)?;
        if norm > 0.0 {
            beta = b.scale(u * params.mu / norm);
        }
    }
    AugmentedMatrix::from_parts(omega, beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matform::in_admissible;
    use crate::sympoly::{gamma_schedule, in_sigma_gamma};

    #[test]
    fn slice_samples_are_in_sigma() {
        let s = gamma_schedule(10, 7, None).unwrap();
        let mut rng = sample_rng(1, 0);
        for _ in 0..200 {
            let l = sample_sigma_slice(&s, &mut rng);
            assert!(in_sigma_gamma(&l, &s));
            let norm: f64 = l.values().iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn admissible_round_trip() {
        let s = gamma_schedule(5, 3, Some(0.5)).unwrap();
        let p = AdmissibilityParams::new(0.1, 1.0, Some(s)).unwrap();
        for i in 0..50 {
            let r = sample_admissible(5, &p, &mut sample_rng(7, i)).unwrap();
            assert!(in_admissible(r.r(), &p));
        }
    }

    #[test]
    fn zero_mu_gives_symmetric() {
        let p = AdmissibilityParams::new(0.0, 0.0, None).unwrap();
        let r = sample_admissible(4, &p, &mut sample_rng(3, 0)).unwrap();
        assert_eq!(r.beta().max_abs(), 0.0);
        let p = AdmissibilityParams::new(0.0, 0.5, None).unwrap();
        assert!(matches!(sample_admissible(4, &p, &mut sample_rng(3, 0)), Err(Error::InfeasibleParams(_))));
    }

    #[test]
    fn streams_are_reproducible() {
        let a: f64 = sample_rng(5, 3).random();
        let b: f64 = sample_rng(5, 3).random();
        let c: f64 = sample_rng(5, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
