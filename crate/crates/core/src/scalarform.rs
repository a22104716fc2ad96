//! Derivatives of `f_k(λ) = log σ_k(λ)` and the reduced quadratic form
//! `d̃²f_k(λ, η) = d²f_k(λ, λ∘η)`.

use serde::{Deserialize, Serialize};

use crate::linalg::{det_lu, sym_eigen, DenseMatrix};
use crate::sympoly::{deleted_table, elementary, elementary_upto, gamma_schedule, without, Branch, Spectrum};
use crate::{Error, Result};

/// Symmetric `M` such that the form value at `v` is `vᵀ M v`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticFormMatrix {
    entries: DenseMatrix,
}

impl QuadraticFormMatrix {
    pub fn new(entries: DenseMatrix) -> Result<Self> {
        entries.square_dim()?;
        entries.check_symmetric()?;
        Ok(Self { entries })
    }

    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &DenseMatrix {
        &self.entries
    }

    pub fn value(&self, v: &[f64]) -> Result<f64> {
        let mv = self.entries.mat_vec(v)?;
        Ok(mv.iter().zip(v).map(|(a, b)| a * b).sum())
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(sym_eigen(&self.entries)?.lambda_max())
    }
}

/// The four reduced terms; `d̃²f_k = −A + B − C = −A + E`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermDecomposition {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub e: f64,
}

/// `σ_k(λ)`, requiring it to be positive.
fn positive_sigma(k: usize, lambda: &Spectrum) -> Result<f64> {
    let n = lambda.len();
    if k > n {
        return Err(Error::BadDegree { k, n });
    }
    let s = elementary(k, lambda.values());
    if !(s > 0.0) {
        return Err(Error::NonPositiveSigma(s));
    }
    Ok(s)
}

fn check_len(lambda: &Spectrum, v: &[f64]) -> Result<()> {
    if v.len() != lambda.len() {
        return Err(Error::DimensionMismatch { expected: lambda.len(), got: v.len() });
    }
    Ok(())
}

pub fn f_k(k: usize, lambda: &Spectrum) -> Result<f64> {
    Ok(positive_sigma(k, lambda)?.ln())
}

/// `∂f_k/∂λ_i = σ_{k−1}^{(i)}/σ_k`.
pub fn grad_f_k(k: usize, lambda: &Spectrum) -> Result<Vec<f64>> {
    let s = positive_sigma(k, lambda)?;
    if k == 0 {
        return Ok(vec![0.0; lambda.len()]);
    }
    Ok(deleted_table(lambda.values(), k - 1).iter().map(|row| row[k - 1] / s).collect())
}

/// Hessian of `f_k`:
/// `H_ii = −(σ_{k−1}^{(i)})²/σ_k²`,
/// `H_ij = σ_{k−2}^{(i,j)}/σ_k − σ_{k−1}^{(i)}σ_{k−1}^{(j)}/σ_k²`.
pub fn hessian_f_k(k: usize, lambda: &Spectrum) -> Result<QuadraticFormMatrix> {
    let s = positive_sigma(k, lambda)?;
    let n = lambda.len();
    let x = lambda.values();
    if k == 0 {
        return QuadraticFormMatrix::new(DenseMatrix::zeros(n, n));
    }
    let g: Vec<f64> = deleted_table(x, k - 1).iter().map(|row| row[k - 1] / s).collect();
    let mut h = DenseMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = -g[i] * g[i];
        for j in i + 1..n {
            let s2 = if k >= 2 { elementary(k - 2, &without(x, &[i, j])) } else { 0.0 };
            let v = s2 / s - g[i] * g[j];
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    QuadraticFormMatrix::new(h)
}

/// `d²f_k(λ, ξ) = ξᵀ H ξ`.
pub fn d2f(k: usize, lambda: &Spectrum, xi: &[f64]) -> Result<f64> {
    check_len(lambda, xi)?;
    hessian_f_k(k, lambda)?.value(xi)
}

/// `d²f_k(λ, λ∘η)`.
pub fn d2f_tilde(k: usize, lambda: &Spectrum, eta: &[f64]) -> Result<f64> {
    check_len(lambda, eta)?;
    let xi: Vec<f64> = lambda.values().iter().zip(eta).map(|(l, e)| l * e).collect();
    d2f(k, lambda, &xi)
}

/// The off-diagonal coefficient `a_ij` of the reduced form, in two normalizations.
///
/// `hessian_implied = −σ_k² H_ij = [σ_{k−1}^{(i,j)}]² − σ_k^{(i,j)} σ_{k−2}^{(i,j)}` is
/// the coefficient that reproduces `d̃²f_k`. `halved` carries a factor ½ on
/// the squared term and does not; it is kept for comparison only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ACoefficient {
    pub halved: f64,
    pub hessian_implied: f64,
}

pub fn a_coeff(k: usize, lambda: &Spectrum, i: usize, j: usize) -> Result<ACoefficient> {
    let n = lambda.len();
    if !(2..n).contains(&k) {
        return Err(Error::BadDegree { k, n });
    }
    for idx in [i, j] {
        if idx >= n {
            return Err(Error::BadIndex { index: idx, n });
        }
    }
    if i == j {
        return Err(Error::BadIndex { index: j, n });
    }
    let e = elementary_upto(&without(lambda.values(), &[i, j]), k);
    let (s2, s1, s0) = (e[k - 2], e[k - 1], e[k]);
    let h = hessian_f_k(k, lambda)?;
    let s = positive_sigma(k, lambda)?;
    Ok(ACoefficient { halved: 0.5 * s1 * s1 - s0 * s2, hessian_implied: -s * s * h.entries()[(i, j)] })
}

/// `diag(λ) H diag(λ)`, the matrix of `η ↦ d̃²f_k(λ, η)`.
pub fn tilde_coeff_matrix(k: usize, lambda: &Spectrum) -> Result<QuadraticFormMatrix> {
    let h = hessian_f_k(k, lambda)?;
    let x = lambda.values();
    let n = x.len();
    let m = DenseMatrix::from_fn(n, n, |i, j| x[i] * h.entries()[(i, j)] * x[j]);
    QuadraticFormMatrix::new(m)
}

/// `Ã, B̃, C̃, Ẽ` in closed form. With `w_i = λ_i σ_{k−1}^{(i)}/σ_k`:
/// `A = (Σ w_i η_i)²`, `C = Σ w_i η_i²`,
/// `E = σ_k⁻¹ Σ_{i≠j} λ_iλ_j σ_{k−2}^{(i,j)} η_iη_j`, `B = C + E`.
pub fn term_decomposition(k: usize, lambda: &Spectrum, eta: &[f64]) -> Result<TermDecomposition> {
    check_len(lambda, eta)?;
    let s = positive_sigma(k, lambda)?;
    if k == 0 {
        return Ok(TermDecomposition { a: 0.0, b: 0.0, c: 0.0, e: 0.0 });
    }
    let x = lambda.values();
    let n = x.len();
    let w: Vec<f64> = deleted_table(x, k - 1).iter().zip(x).map(|(row, l)| l * row[k - 1] / s).collect();
    let first: f64 = w.iter().zip(eta).map(|(w, e)| w * e).sum();
    let c: f64 = w.iter().zip(eta).map(|(w, e)| w * e * e).sum();
    let mut e = 0.0;
    if k >= 2 {
        for i in 0..n {
            for j in i + 1..n {
                let s2 = elementary(k - 2, &without(x, &[i, j]));
                e += 2.0 * x[i] * x[j] * s2 * eta[i] * eta[j];
            }
        }
        e /= s;
    }
    Ok(TermDecomposition { a: first * first, b: c + e, c, e })
}

/// Zero diagonal, `G_ij = σ_{k−2}^{(i,j)}(λ)` off the diagonal.
pub fn g_matrix(k: usize, lambda: &Spectrum) -> Result<DenseMatrix> {
    let n = lambda.len();
    if !(2..n).contains(&k) {
        return Err(Error::BadDegree { k, n });
    }
    let x = lambda.values();
    Ok(DenseMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { elementary(k - 2, &without(x, &[i, j])) }))
}

/// `|det G_k| ≤ 1e−10 · (max |G_ij|)ⁿ`.
pub fn g_matrix_degenerate(k: usize, lambda: &Spectrum) -> Result<bool> {
    let g = g_matrix(k, lambda)?;
    let scale = g.max_abs();
    if scale == 0.0 {
        return Ok(true);
    }
    let det = det_lu(&g)?;
    Ok(det.abs() <= 1e-10 * scale.powi(lambda.len() as i32))
}

/// `d²g_k(λ, ξ)` for `g_k = σ_k^{1/k}` on `Γ_n`:
/// `(k−1)/k² · g_k · [−A + k E/(k−1)]` with the terms taken at `η = ξ/λ`.
pub fn d2g_k(k: usize, lambda: &Spectrum, xi: &[f64]) -> Result<f64> {
    check_len(lambda, xi)?;
    if !lambda.is_positive() {
        return Err(Error::NotPositive);
    }
    if k < 2 {
        return Err(Error::BadDegree { k, n: lambda.len() });
    }
    let eta: Vec<f64> = xi.iter().zip(lambda.values()).map(|(x, l)| x / l).collect();
    let t = term_decomposition(k, lambda, &eta)?;
    let g = positive_sigma(k, lambda)?.powf(1.0 / k as f64);
    let kf = k as f64;
    Ok(g / (kf * kf) * ((1.0 - kf) * t.a + kf * t.e))
}

/// Outcome of the ratio bounds `r_j = σ_k^{(j)}/σ_{k−1}^{(j)}` on a sorted
/// spectrum in the mid-range branch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioBounds {
    /// `λ_n ≥ r_n`.
    pub last_entry: bool,
    /// `r_n ≥ r_j` for each `j`.
    pub last_ratio_dominates: Vec<bool>,
    /// `λ_j ≥ r_j` for each `j`.
    pub entry_bounds: Vec<bool>,
    /// At `λ' = (λ_1, …, λ_1)` the ratio equals `γ_k λ_1`.
    pub supremum: bool,
    pub margins: RatioMargins,
}

/// Relative excess `(rhs − lhs)/scale` of each bound, maximized over `j`;
/// a bound holds when its margin is at most [`RATIO_TOL`]. The supremum
/// margin is the relative error of the equality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioMargins {
    pub last_entry: f64,
    pub last_ratio_dominates: f64,
    pub entry_bounds: f64,
    pub supremum: f64,
}

impl RatioBounds {
    pub fn all_hold(&self) -> bool {
        self.last_entry
            && self.supremum
            && self.last_ratio_dominates.iter().all(|&b| b)
            && self.entry_bounds.iter().all(|&b| b)
    }
}

/// Relative tolerance used by [`ratio_bounds_check`].
pub const RATIO_TOL: f64 = 1e-9;

fn rel_excess(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (rhs - lhs) / scale
    }
}

pub fn ratio_bounds_check(k: usize, lambda_sorted_desc: &Spectrum) -> Result<RatioBounds> {
    let n = lambda_sorted_desc.len();
    let sched = gamma_schedule(n, k, Some(0.5))?;
    if sched.branch != Branch::Midrange {
        return Err(Error::BadRange(format!("k = {k} is not mid-range for n = {n}")));
    }
    let x = lambda_sorted_desc.values();
    if x.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::BadRange("spectrum must be sorted descending".into()));
    }
    if !lambda_sorted_desc.is_positive() || x[n - 1] < sched.gamma_k * x[0] {
        return Err(Error::BadRange("spectrum is outside Σ_(γ_k)".into()));
    }
    let ratios: Vec<f64> = deleted_table(x, k).iter().map(|row| row[k] / row[k - 1]).collect();
    let rn = ratios[n - 1];
    let last = rel_excess(x[n - 1], rn);
    let (mut dom_worst, mut ent_worst) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut dom = Vec::with_capacity(n);
    let mut ent = Vec::with_capacity(n);
    for j in 0..n {
        let m1 = rel_excess(rn, ratios[j]);
        let m2 = rel_excess(x[j], ratios[j]);
        dom.push(m1 <= RATIO_TOL);
        ent.push(m2 <= RATIO_TOL);
        dom_worst = dom_worst.max(m1);
        ent_worst = ent_worst.max(m2);
    }
    let flat = vec![x[0]; n - 1];
    let e = elementary_upto(&flat, k);
    let sup = e[k] / e[k - 1];
    let sup_err = (sup - sched.gamma_k * x[0]).abs() / (sched.gamma_k * x[0]);
    Ok(RatioBounds {
        last_entry: last <= RATIO_TOL,
        last_ratio_dominates: dom,
        entry_bounds: ent,
        supremum: sup_err <= RATIO_TOL,
        margins: RatioMargins {
            last_entry: last,
            last_ratio_dominates: dom_worst,
            entry_bounds: ent_worst,
            supremum: sup_err,
        },
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    fn sp(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn f_and_gradient_examples() {
        assert_relative_eq!(f_k(2, &sp(&[1.0, 1.0, 1.0])).unwrap(), 3f64.ln());
        assert_eq!(f_k(4, &sp(&[1.0; 4])).unwrap(), 0.0);
        let g = grad_f_k(2, &sp(&[1.0, 2.0, 3.0])).unwrap();
        for (a, b) in g.iter().zip([5.0 / 11.0, 4.0 / 11.0, 3.0 / 11.0]) {
            assert_relative_eq!(*a, b, epsilon = 1e-15);
        }
        assert!(matches!(f_k(2, &sp(&[1.0, -1.0, 0.0])), Err(Error::NonPositiveSigma(_))));
    }

    #[test]
    fn hessian_at_ones() {
        let h = hessian_f_k(2, &sp(&[1.0; 3])).unwrap();
        assert_relative_eq!(h.entries()[(0, 0)], -4.0 / 9.0, epsilon = 1e-15);
        assert_relative_eq!(h.entries()[(0, 1)], -1.0 / 9.0, epsilon = 1e-15);
        assert_relative_eq!(d2f(2, &sp(&[1.0; 3]), &[1.0; 3]).unwrap(), -2.0, epsilon = 1e-14);
    }

    #[test]
    fn homogeneity_along_ray() {
        let l = sp(&[0.3, 1.7, 2.2, 0.9, 1.1]);
        for k in 1..=5 {
            assert_relative_eq!(d2f(k, &l, l.values()).unwrap(), -(k as f64), epsilon = 1e-12);
            assert_relative_eq!(d2f_tilde(k, &l, &[1.0; 5]).unwrap(), -(k as f64), epsilon = 1e-12);
            let g = grad_f_k(k, &l).unwrap();
            let euler: f64 = g.iter().zip(l.values()).map(|(a, b)| a * b).sum();
            assert_relative_eq!(euler, k as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn a_coefficient_at_ones() {
        let a = a_coeff(2, &sp(&[1.0; 4]), 0, 1).unwrap();
        assert_relative_eq!(a.halved, 1.0);
        assert_relative_eq!(a.hessian_implied, 3.0, epsilon = 1e-14);
        assert!(a_coeff(2, &sp(&[1.0; 4]), 1, 1).is_err());
    }

    #[test]
    fn terms_at_ones_vector() {
        let l = sp(&[0.5, 1.5, 2.0, 1.0]);
        let t = term_decomposition(3, &l, &[1.0; 4]).unwrap();
        assert_relative_eq!(t.a, 9.0, epsilon = 1e-12);
        assert_relative_eq!(t.e, 6.0, epsilon = 1e-12);
        assert_relative_eq!(t.b - t.c, t.e, epsilon = 1e-12);
        let z = term_decomposition(3, &l, &[0.0; 4]).unwrap();
        assert_eq!((z.a, z.b, z.c, z.e), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn g_matrix_determinants() {
        for n in 3..8 {
            let g = g_matrix(2, &sp(&vec![1.3; n])).unwrap();
            let expected = if n % 2 == 1 { 1.0 } else { -1.0 } * (n - 1) as f64;
            assert_relative_eq!(det_lu(&g).unwrap(), expected, epsilon = 1e-10);
        }
        let g = g_matrix(3, &sp(&[1.0; 4])).unwrap();
        assert_relative_eq!(det_lu(&g).unwrap(), -48.0, epsilon = 1e-10);
        assert!(!g_matrix_degenerate(3, &sp(&[1.0; 4])).unwrap());
    }

    #[test]
    fn d2g_vanishes_on_ray() {
        let l = sp(&[0.7, 1.2, 2.5, 0.4, 1.0]);
        assert!(d2g_k(3, &l, l.values()).unwrap().abs() < 1e-13);
    }

    #[test]
    fn ratio_bounds_at_ones() {
        let r = ratio_bounds_check(7, &sp(&[1.0; 10])).unwrap();
        assert!(r.all_hold());
        assert!(matches!(ratio_bounds_check(3, &sp(&[1.0; 10])), Err(Error::BadRange(_))));
        assert!(matches!(
            ratio_bounds_check(7, &sp(&[1.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0])),
            Err(Error::BadRange(_))
        ));
    }
}
