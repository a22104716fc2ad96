//! Independent reference computations: central finite differences, literal
//! subset enumerations and characteristic-polynomial coefficients. Nothing in
//! here reuses the closed forms it is meant to check.

use itertools::Itertools;

use crate::linalg::DenseMatrix;
use crate::matform::check_budget;
use crate::scalarform::TermDecomposition;
use crate::sympoly::Spectrum;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdConfig {
    relative_step: f64,
}

impl FdConfig {
    pub fn new(relative_step: f64) -> Result<Self> {
        if !(relative_step > 1e-9 && relative_step < 1e-2) {
            return Err(Error::BadRange(format!("relative step {relative_step} must lie in (1e-9, 1e-2)")));
        }
        Ok(Self { relative_step })
    }

    pub fn relative_step(&self) -> f64 {
        self.relative_step
    }

    /// Absolute step `h = relative_step · max(1, max |x_i|)`.
    pub fn step_for(&self, x: &[f64]) -> f64 {
        self.relative_step * x.iter().fold(1.0f64, |m, v| m.max(v.abs()))
    }
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { relative_step: 1e-5 }
    }
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite)
    }
}

/// Central-difference gradient of a scalar field on `ℝⁿ`.
pub fn fd_grad(f: impl Fn(&[f64]) -> f64, x: &[f64], cfg: FdConfig) -> Result<Vec<f64>> {
    let h = cfg.step_for(x);
    let mut probe = x.to_vec();
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let fp = finite(f(&probe))?;
        probe[i] = x[i] - h;
        let fm = finite(f(&probe))?;
        probe[i] = x[i];
        out.push((fp - fm) / (2.0 * h));
    }
    Ok(out)
}

/// `[f(x + hd) − 2f(x) + f(x − hd)] / h²`.
pub fn fd_second_directional(f: impl Fn(&[f64]) -> f64, x: &[f64], dir: &[f64], cfg: FdConfig) -> Result<f64> {
    if dir.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: dir.len() });
    }
    let h = cfg.step_for(x);
    let shifted = |s: f64| -> Vec<f64> { x.iter().zip(dir).map(|(a, d)| a + s * d).collect() };
    let fp = finite(f(&shifted(h)))?;
    let f0 = finite(f(x))?;
    let fm = finite(f(&shifted(-h)))?;
    Ok((fp - 2.0 * f0 + fm) / (h * h))
}

fn reshape(rows: usize, cols: usize, v: &[f64]) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |i, j| v[i * cols + j])
}

/// [`fd_grad`] over matrices, entries flattened row-major.
pub fn fd_grad_matrix(f: impl Fn(&DenseMatrix) -> f64, x: &DenseMatrix, cfg: FdConfig) -> Result<DenseMatrix> {
    let (r, c) = (x.rows(), x.cols());
    let g = fd_grad(|v| f(&reshape(r, c, v)), x.as_slice(), cfg)?;
    Ok(reshape(r, c, &g))
}

/// [`fd_second_directional`] over matrices.
pub fn fd_second_directional_matrix(
    f: impl Fn(&DenseMatrix) -> f64,
    x: &DenseMatrix,
    dir: &DenseMatrix,
    cfg: FdConfig,
) -> Result<f64> {
    if (dir.rows(), dir.cols()) != (x.rows(), x.cols()) {
        return Err(Error::DimensionMismatch { expected: x.as_slice().len(), got: dir.as_slice().len() });
    }
    let (r, c) = (x.rows(), x.cols());
    fd_second_directional(|v| f(&reshape(r, c, v)), x.as_slice(), dir.as_slice(), cfg)
}

/// `e_1, …, e_n` of the eigenvalues of `A` by the Faddeev–LeVerrier recurrence.
pub fn charpoly_ek(a: &DenseMatrix) -> Result<Vec<f64>> {
    let n = a.square_dim()?;
    // c[j] is the coefficient of t^j in det(tI − A).
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = DenseMatrix::zeros(n, n);
    for k in 1..=n {
        let mut next = a.matmul(&m)?;
        for i in 0..n {
            next[(i, i)] += c[n - k + 1];
        }
        m = next;
        c[n - k] = -a.matmul(&m)?.trace() / k as f64;
    }
    Ok((1..=n).map(|k| if k % 2 == 0 { c[n - k] } else { -c[n - k] }).collect())
}

/// `σ_k(λ)` as a literal sum of products over k-subsets.
pub fn subset_sigma(k: usize, lambda: &[f64]) -> Result<f64> {
    check_budget(lambda.len(), k)?;
    Ok((0..lambda.len()).combinations(k).map(|s| s.iter().map(|&i| lambda[i]).product::<f64>()).sum())
}

/// `Ã, B̃, C̃, Ẽ` summed subset by subset with weights `γ_S = λ_S / σ_k`.
pub fn subset_terms(k: usize, lambda: &Spectrum, eta: &[f64]) -> Result<TermDecomposition> {
    let x = lambda.values();
    let n = x.len();
    if eta.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: eta.len() });
    }
    if k == 0 || k > n {
        return Err(Error::BadDegree { k, n });
    }
    let s = subset_sigma(k, x)?;
    if !(s > 0.0) {
        return Err(Error::NonPositiveSigma(s));
    }
    let (mut first, mut b, mut c, mut e) = (0.0, 0.0, 0.0, 0.0);
    for subset in (0..n).combinations(k) {
        let w = subset.iter().map(|&i| x[i]).product::<f64>() / s;
        let lin: f64 = subset.iter().map(|&i| eta[i]).sum();
        let sq: f64 = subset.iter().map(|&i| eta[i] * eta[i]).sum();
        let mut cross = 0.0;
        for &p in &subset {
            for &q in &subset {
                if p != q {
                    cross += eta[p] * eta[q];
                }
            }
        }
        first += w * lin;
        b += w * lin * lin;
        c += w * sq;
        e += w * cross;
    }
    Ok(TermDecomposition { a: first * first, b, c, e })
}

/// `d²f_k(λ, ξ) = −A + B − C` at `η = ξ/λ`, by enumeration. Needs `λ_i ≠ 0`.
pub fn subset_d2f(k: usize, lambda: &Spectrum, xi: &[f64]) -> Result<f64> {
    if lambda.values().contains(&0.0) {
        return Err(Error::NotPositive);
    }
    if xi.len() != lambda.len() {
        return Err(Error::DimensionMismatch { expected: lambda.len(), got: xi.len() });
    }
    let eta: Vec<f64> = xi.iter().zip(lambda.values()).map(|(x, l)| x / l).collect();
    let t = subset_terms(k, lambda, &eta)?;
    Ok(-t.a + t.b - t.c)
}
