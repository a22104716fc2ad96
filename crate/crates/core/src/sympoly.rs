//! Elementary symmetric polynomials, their deleted variants, and the cones
//! `Γ_n ⊂ Γ_k` and `Σ_(γ_k)`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A finite vector `λ ∈ ℝⁿ` with `n ≥ 2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::SpectrumTooShort(values.len()));
        }
        if let Some(pos) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteEntry(pos));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|&x| x > 0.0)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for Spectrum {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<Spectrum> for Vec<f64> {
    fn from(s: Spectrum) -> Self {
        s.0
    }
}

/// `e_0, …, e_kmax` of `values` by the prefix recurrence; entries past
/// `values.len()` are zero.
pub fn elementary_upto(values: &[f64], kmax: usize) -> Vec<f64> {
    let mut e = vec![0.0; kmax + 1];
    e[0] = 1.0;
    for (m, &x) in values.iter().enumerate() {
        // Only degrees ≤ m+1 can be non-zero after m+1 entries.
        for j in (1..=kmax.min(m + 1)).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

/// `e_k(values)`, zero when `k > values.len()`.
pub fn elementary(k: usize, values: &[f64]) -> f64 {
    elementary_upto(values, k)[k]
}

fn check_degree(k: usize, n: usize) -> Result<()> {
    if k > n {
        return Err(Error::BadDegree { k, n });
    }
    Ok(())
}

fn check_index(i: usize, n: usize) -> Result<()> {
    if i >= n {
        return Err(Error::BadIndex { index: i, n });
    }
    Ok(())
}

/// `σ_k(λ)` for `0 ≤ k ≤ n`.
pub fn sigma(k: usize, lambda: &Spectrum) -> Result<f64> {
    check_degree(k, lambda.len())?;
    Ok(elementary(k, lambda.values()))
}

/// `σ_k^{(i)}(λ)`: `σ_k` with `λ_i` removed.
pub fn sigma_deleted(k: usize, lambda: &Spectrum, i: usize) -> Result<f64> {
    let n = lambda.len();
    check_degree(k, n)?;
    check_index(i, n)?;
    Ok(elementary(k, &without(lambda.values(), &[i])))
}

/// `σ_k^{(i,j)}(λ)`: `σ_k` with `λ_i` and `λ_j` removed.
pub fn sigma_deleted2(k: usize, lambda: &Spectrum, i: usize, j: usize) -> Result<f64> {
    let n = lambda.len();
    check_degree(k, n)?;
    check_index(i, n)?;
    check_index(j, n)?;
    if i == j {
        return Err(Error::BadIndex { index: j, n });
    }
    Ok(elementary(k, &without(lambda.values(), &[i, j])))
}

pub(crate) fn without(values: &[f64], drop: &[usize]) -> Vec<f64> {
    values.iter().enumerate().filter(|(i, _)| !drop.contains(i)).map(|(_, &x)| x).collect()
}

/// Table of `σ_d^{(i)}` for all `i` and `d ≤ kmax`: row `i` holds degrees `0..=kmax`.
pub(crate) fn deleted_table(values: &[f64], kmax: usize) -> Vec<Vec<f64>> {
    (0..values.len()).map(|i| elementary_upto(&without(values, &[i]), kmax)).collect()
}

/// Entrywise reciprocal `1/λ`.
pub fn dual_spectrum(lambda: &Spectrum) -> Result<Spectrum> {
    if !lambda.is_positive() {
        return Err(Error::NotPositive);
    }
    Spectrum::new(lambda.values().iter().map(|x| 1.0 / x).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Branch {
    /// `k ∈ {2, 3, 4, n−2, n−1}`; `γ_k` chosen by the caller.
    Free,
    /// `⌊n/2⌋+1 ≤ k ≤ n−3`, `γ_k = (n−k)/k`.
    Midrange,
    /// `5 ≤ k ≤ ⌊n/2⌋`, `γ_k = (k−2)/(n−k+2)`.
    LowDual,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Free => "FREE",
            Self::Midrange => "MIDRANGE",
            Self::LowDual => "LOW_DUAL",
        }
    }
}

/// The pinching ratio `γ_k` attached to a degree `k` in dimension `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaSchedule {
    pub n: usize,
    pub k: usize,
    pub gamma_k: f64,
    pub branch: Branch,
}

impl GammaSchedule {
    pub fn branch_of(n: usize, k: usize) -> Branch {
        if [2, 3, 4, n - 2, n - 1].contains(&k) {
            Branch::Free
        } else if k > n / 2 {
            Branch::Midrange
        } else {
            Branch::LowDual
        }
    }
}

/// Builds the schedule for `(n, k)`. `free_gamma` is required on the free
/// branch and ignored elsewhere.
pub fn gamma_schedule(n: usize, k: usize, free_gamma: Option<f64>) -> Result<GammaSchedule> {
    if n < 3 {
        return Err(Error::BadRange(format!("n = {n} must be at least 3")));
    }
    if !(2..n).contains(&k) {
        return Err(Error::BadRange(format!("k = {k} must lie in [2, {}]", n - 1)));
    }
    let branch = GammaSchedule::branch_of(n, k);
    let gamma_k = match branch {
        Branch::Free => {
            let g = free_gamma.ok_or(Error::MissingFreeGamma { n, k })?;
            if !(g > 0.0 && g < 1.0) {
                return Err(Error::BadRange(format!("γ = {g} must lie in (0, 1)")));
            }
            g
        }
        Branch::Midrange => (n - k) as f64 / k as f64,
        Branch::LowDual => (k - 2) as f64 / (n - (k - 2)) as f64,
    };
    Ok(GammaSchedule { n, k, gamma_k, branch })
}

/// `λ ∈ Γ_k`; for `k = n` this is the positive cone.
pub fn in_gamma_cone(lambda: &Spectrum, k: usize) -> bool {
    let n = lambda.len();
    if k == 0 || k > n {
        return false;
    }
    if k == n {
        return lambda.is_positive();
    }
    elementary_upto(lambda.values(), k)[1..].iter().all(|&s| s > 0.0)
}

/// `λ ∈ Σ_(γ_k)`: positive with `min λ ≥ γ_k · max λ`.
pub fn in_sigma_gamma(lambda: &Spectrum, sched: &GammaSchedule) -> bool {
    lambda.len() == sched.n && lambda.is_positive() && lambda.min() >= sched.gamma_k * lambda.max()
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    fn sp(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(2, &sp(&[1.0, 1.0, 1.0])).unwrap(), 3.0);
        assert_eq!(sigma(0, &sp(&[4.0, -2.0])).unwrap(), 1.0);
        assert_eq!(sigma(2, &sp(&[1.0, 2.0, 3.0])).unwrap(), 11.0);
        assert_eq!(sigma(4, &sp(&[1.0, 2.0, 3.0])), Err(Error::BadDegree { k: 4, n: 3 }));
    }

    #[test]
    fn deleted_examples() {
        let l = sp(&[1.0, 2.0, 3.0]);
        assert_eq!(sigma_deleted(1, &l, 1).unwrap(), 4.0);
        assert_eq!(sigma_deleted2(0, &l, 0, 2).unwrap(), 1.0);
        assert_eq!(sigma_deleted2(2, &sp(&[1.0, 2.0, 3.0, 4.0]), 0, 2).unwrap(), 8.0);
        assert_eq!(sigma_deleted(1, &l, 3), Err(Error::BadIndex { index: 3, n: 3 }));
        assert!(sigma_deleted2(1, &l, 1, 1).is_err());
    }

    #[test]
    fn duality_example() {
        let l = sp(&[1.0, 2.0, 3.0]);
        let d = dual_spectrum(&l).unwrap();
        assert_relative_eq!(6.0 * sigma(1, &d).unwrap(), 11.0, epsilon = 1e-14);
        assert_eq!(dual_spectrum(&sp(&[2.0, 4.0])).unwrap().values(), &[0.5, 0.25]);
        assert_eq!(dual_spectrum(&sp(&[1.0, -1.0])), Err(Error::NotPositive));
    }

    #[test]
    fn schedule_branches() {
        let s = gamma_schedule(10, 7, None).unwrap();
        assert_eq!(s.branch, Branch::Midrange);
        assert_relative_eq!(s.gamma_k, 3.0 / 7.0);
        let s = gamma_schedule(12, 5, None).unwrap();
        assert_eq!(s.branch, Branch::LowDual);
        assert_relative_eq!(s.gamma_k, 1.0 / 3.0);
        let s = gamma_schedule(6, 2, Some(0.5)).unwrap();
        assert_eq!((s.branch, s.gamma_k), (Branch::Free, 0.5));
        assert_eq!(gamma_schedule(6, 2, None), Err(Error::MissingFreeGamma { n: 6, k: 2 }));
        assert!(matches!(gamma_schedule(6, 6, Some(0.5)), Err(Error::BadRange(_))));
        assert!(matches!(gamma_schedule(6, 2, Some(1.0)), Err(Error::BadRange(_))));
        // n = 7: k = 5 is both n−2 and midrange; free wins.
        assert_eq!(gamma_schedule(7, 5, Some(0.3)).unwrap().branch, Branch::Free);
    }

    #[test]
    fn cone_membership() {
        assert!(in_gamma_cone(&sp(&[1.0, 1.0, 1.0]), 3));
        assert!(!in_gamma_cone(&sp(&[-1.0, -1.0, -1.0]), 1));
        assert!(in_gamma_cone(&sp(&[3.0, 3.0, -1.0]), 2));
        assert!(!in_gamma_cone(&sp(&[3.0, 3.0, -1.0]), 3));

        let s = gamma_schedule(10, 7, None).unwrap();
        let mut v = vec![1.0; 10];
        v[9] = 0.45;
        assert!(in_sigma_gamma(&sp(&v), &s));
        v[9] = 0.42;
        assert!(!in_sigma_gamma(&sp(&v), &s));
    }
}
