//! Dense row-major matrices and the handful of factorizations the rest of the
//! crate needs. Dimensions stay small (n ≤ 64), so everything is plain
//! `Vec<f64>` arithmetic.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Sweep budget of the cyclic Jacobi eigensolver.
pub const JACOBI_MAX_SWEEPS: usize = 30;

/// Relative tolerance for the symmetry and skew-symmetry checks.
pub const STRUCTURE_TOL: f64 = 1e-12;

/// A pivot below `SINGULAR_TOL · |A|_F` marks the matrix singular.
pub const SINGULAR_TOL: f64 = 1e-12;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major entries, rejecting NaN and infinities.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape { rows, cols, len: data.len() });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteEntry(pos));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::Shape { rows: r, cols: c, len: row.len() * r });
            }
            data.extend_from_slice(row);
        }
        Self::new(r, c, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diag(d: &[f64]) -> Self {
        Self::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols.max(1)).take(self.rows).map(<[f64]>::to_vec).collect()
    }

    /// Returns the dimension of a square matrix.
    pub fn square_dim(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, got: rhs.rows });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(l, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mat_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch { expected: self.cols, got: v.len() });
        }
        Ok((0..self.rows).map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum()).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    /// Entrywise `self + s · other`.
    pub fn add_scaled(&self, other: &Self, s: f64) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + s * b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Frobenius inner product `Σ A_ij B_ij`.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// `(A + Aᵀ)/2`.
    pub fn symmetric_part(&self) -> Result<Self> {
        let n = self.square_dim()?;
        Ok(Self::from_fn(n, n, |i, j| 0.5 * (self[(i, j)] + self[(j, i)])))
    }

    /// `(A − Aᵀ)/2`.
    pub fn skew_part(&self) -> Result<Self> {
        let n = self.square_dim()?;
        Ok(Self::from_fn(n, n, |i, j| 0.5 * (self[(i, j)] - self[(j, i)])))
    }

    /// Principal submatrix on the (sorted, distinct) indices `idx`.
    pub fn principal(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), idx.len(), |a, b| self[(idx[a], idx[b])])
    }

    /// `|A − Aᵀ|_F`.
    pub fn asymmetry(&self) -> Result<f64> {
        let n = self.square_dim()?;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d = self[(i, j)] - self[(j, i)];
                s += d * d;
            }
        }
        Ok(s.sqrt())
    }

    /// `|A + Aᵀ|_F`.
    pub fn skewness_defect(&self) -> Result<f64> {
        let n = self.square_dim()?;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d = self[(i, j)] + self[(j, i)];
                s += d * d;
            }
        }
        Ok(s.sqrt())
    }

    pub fn check_symmetric(&self) -> Result<()> {
        let a = self.asymmetry()?;
        if a > STRUCTURE_TOL * self.frobenius_norm() {
            return Err(Error::NotSymmetric(a));
        }
        Ok(())
    }

    pub fn check_skew(&self) -> Result<()> {
        let a = self.skewness_defect()?;
        if a > STRUCTURE_TOL * self.frobenius_norm() {
            return Err(Error::NotSkew(a));
        }
        Ok(())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, got: other.rows });
        }
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: other.cols });
        }
        Ok(())
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for row in self.to_rows() {
            writeln!(f, "  {row:?}")?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

// Operator forms panic on shape mismatch, like slice indexing; use the
// fallible methods when shapes come from user input.
impl Add for &DenseMatrix {
    type Output = DenseMatrix;

    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        self.add_scaled(rhs, 1.0).expect("shape mismatch in matrix addition")
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;

    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        self.add_scaled(rhs, -1.0).expect("shape mismatch in matrix subtraction")
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;

    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        self.matmul(rhs).expect("shape mismatch in matrix product")
    }
}

/// Eigendecomposition `A = V diag(values) Vᵀ` of a symmetric matrix.
///
/// Eigenvalues are sorted descending. Column `j` of `vectors` belongs to
/// `values[j]` and its largest-magnitude component is positive.
#[derive(Clone, Debug, PartialEq)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl SymEigen {
    pub fn lambda_max(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn lambda_min(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let v = &self.vectors;
        let n = v.rows();
        DenseMatrix::from_fn(n, n, |i, j| (0..n).map(|l| v[(i, l)] * self.values[l] * v[(j, l)]).sum())
    }
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
pub fn sym_eigen(a: &DenseMatrix) -> Result<SymEigen> {
    let n = a.square_dim()?;
    a.check_symmetric()?;
    let mut m = a.symmetric_part()?;
    let mut v = DenseMatrix::identity(n);
    let scale = m.frobenius_norm();

    let mut converged = false;
    for _ in 0..=JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for l in 0..n {
                    let (mlp, mlq) = (m[(l, p)], m[(l, q)]);
                    m[(l, p)] = c * mlp - s * mlq;
                    m[(l, q)] = s * mlp + c * mlq;
                }
                for l in 0..n {
                    let (mpl, mql) = (m[(p, l)], m[(q, l)]);
                    m[(p, l)] = c * mpl - s * mql;
                    m[(q, l)] = s * mpl + c * mql;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for l in 0..n {
                    let (vlp, vlq) = (v[(l, p)], v[(l, q)]);
                    v[(l, p)] = c * vlp - s * vlq;
                    v[(l, q)] = s * vlp + c * vlq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(JACOBI_MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m[(y, y)].total_cmp(&m[(x, x)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = DenseMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    for j in 0..n {
        let mut pivot = 0;
        for i in 1..n {
            if vectors[(i, j)].abs() > vectors[(pivot, j)].abs() {
                pivot = i;
            }
        }
        if vectors[(pivot, j)] < 0.0 {
            for i in 0..n {
                vectors[(i, j)] = -vectors[(i, j)];
            }
        }
    }
    Ok(SymEigen { values, vectors })
}

/// LU factorization with partial pivoting, `P A = L U`, packed in one matrix.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: DenseMatrix,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        let n = a.square_dim()?;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if lu[(r, col)].abs() > lu[(piv, col)].abs() {
                    piv = r;
                }
            }
            if piv != col {
                for c in 0..n {
                    lu.data.swap(col * n + c, piv * n + c);
                }
                perm.swap(col, piv);
                sign = -sign;
            }
            let d = lu[(col, col)];
            if d == 0.0 {
                continue;
            }
            for r in col + 1..n {
                let f = lu[(r, col)] / d;
                lu[(r, col)] = f;
                for c in col + 1..n {
                    lu[(r, c)] -= f * lu[(col, c)];
                }
            }
        }
        Ok(Self { lu, perm, sign })
    }

    pub fn det(&self) -> f64 {
        self.sign * self.lu.diagonal().iter().product::<f64>()
    }

    pub fn min_pivot(&self) -> f64 {
        self.lu.diagonal().iter().fold(f64::INFINITY, |m, x| m.min(x.abs()))
    }

    /// Solves `A x = b`. Assumes the factorization is non-singular.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[(i, j)] * x[j];
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }
}

/// Determinant by partial-pivot LU. An exactly zero pivot column gives 0.
pub fn det_lu(a: &DenseMatrix) -> Result<f64> {
    let n = a.square_dim()?;
    if n == 0 {
        return Ok(1.0);
    }
    Ok(Lu::new(a)?.det())
}

/// Inverse via LU; `Singular` when a pivot falls below `SINGULAR_TOL · |A|_F`.
pub fn invert(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.square_dim()?;
    let lu = Lu::new(a)?;
    if n > 0 && lu.min_pivot() <= SINGULAR_TOL * a.frobenius_norm() {
        return Err(Error::Singular);
    }
    let mut inv = DenseMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.fill(0.0);
        e[j] = 1.0;
        for (i, x) in lu.solve(&e).into_iter().enumerate() {
            inv[(i, j)] = x;
        }
    }
    Ok(inv)
}

/// Non-negative skew spectrum `η_1 ≥ η_2 ≥ …` of a skew matrix, one value per
/// conjugate pair `±iη`; odd dimensions contribute a trailing zero.
pub fn skew_spectrum(b: &DenseMatrix) -> Result<Vec<f64>> {
    b.check_skew()?;
    let n = b.rows();
    let gram = b.transpose().matmul(b)?.symmetric_part()?;
    let eig = sym_eigen(&gram)?;
    Ok((0..n).step_by(2).map(|i| eig.values[i].max(0.0).sqrt()).collect())
}

/// Spectral norm `sqrt(λ_max(AᵀA))`.
pub fn op_norm(a: &DenseMatrix) -> Result<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(0.0);
    }
    let gram = a.transpose().matmul(a)?.symmetric_part()?;
    Ok(sym_eigen(&gram)?.lambda_max().max(0.0).sqrt())
}

/// Orthonormalizes the columns of a square matrix by Gram–Schmidt applied
/// twice. The implied `R` factor has a positive diagonal.
pub fn orthonormalize(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.square_dim()?;
    let mut q = a.clone();
    for j in 0..n {
        for _ in 0..2 {
            for p in 0..j {
                let proj: f64 = (0..n).map(|i| q[(i, p)] * q[(i, j)]).sum();
                for i in 0..n {
                    q[(i, j)] -= proj * q[(i, p)];
                }
            }
        }
        let norm = (0..n).map(|i| q[(i, j)] * q[(i, j)]).sum::<f64>().sqrt();
        if norm <= SINGULAR_TOL * a.frobenius_norm() {
            return Err(Error::Singular);
        }
        for i in 0..n {
            q[(i, j)] /= norm;
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn rejects_non_finite_and_bad_shape() {
        assert_eq!(DenseMatrix::new(1, 2, vec![1.0, f64::NAN]), Err(Error::NonFiniteEntry(1)));
        assert!(matches!(DenseMatrix::new(2, 2, vec![1.0]), Err(Error::Shape { .. })));
    }

    #[test]
    fn jacobi_known_spectrum() {
        let a = m(&[&[2.0, 1.0, 0.0], &[1.0, 2.0, 1.0], &[0.0, 1.0, 2.0]]);
        let e = sym_eigen(&a).unwrap();
        let s = 2f64.sqrt();
        assert_relative_eq!(e.values[0], 2.0 + s, epsilon = 1e-13);
        assert_relative_eq!(e.values[1], 2.0, epsilon = 1e-13);
        assert_relative_eq!(e.values[2], 2.0 - s, epsilon = 1e-13);
        let r = e.reconstruct();
        assert!((&r - &a).frobenius_norm() < 1e-13);
        let vtv = e.vectors.transpose().matmul(&e.vectors).unwrap();
        assert!((&vtv - &DenseMatrix::identity(3)).frobenius_norm() < 1e-13);
    }

    #[test]
    fn jacobi_sign_convention() {
        let a = m(&[&[1.0, -3.0], &[-3.0, 1.0]]);
        let e = sym_eigen(&a).unwrap();
        for j in 0..2 {
            let col = [e.vectors[(0, j)], e.vectors[(1, j)]];
            let big = if col[0].abs() >= col[1].abs() { col[0] } else { col[1] };
            assert!(big > 0.0);
        }
    }

    #[test]
    fn jacobi_rejects_asymmetric() {
        let a = m(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(sym_eigen(&a), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn jacobi_zero_matrix() {
        let e = sym_eigen(&DenseMatrix::zeros(3, 3)).unwrap();
        assert_eq!(e.values, vec![0.0; 3]);
    }

    #[test]
    fn lu_determinant_and_inverse() {
        let a = m(&[&[0.0, 2.0, 1.0], &[1.0, 1.0, 0.0], &[3.0, 0.0, 1.0]]);
        assert_relative_eq!(det_lu(&a).unwrap(), -5.0, epsilon = 1e-14);
        let inv = invert(&a).unwrap();
        let id = a.matmul(&inv).unwrap();
        assert!((&id - &DenseMatrix::identity(3)).frobenius_norm() < 1e-14);
    }

    #[test]
    fn singular_matrix_detected() {
        let a = m(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert_eq!(det_lu(&a).unwrap().abs(), 0.0);
        assert_eq!(invert(&a), Err(Error::Singular));
    }

    #[test]
    fn skew_spectrum_of_block() {
        let b = m(&[&[0.0, 3.0, 0.0], &[-3.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]);
        let s = skew_spectrum(&b).unwrap();
        assert_eq!(s.len(), 2);
        assert_relative_eq!(s[0], 3.0, epsilon = 1e-14);
        assert!(s[1].abs() < 1e-14);
        assert!(matches!(skew_spectrum(&m(&[&[0.0, 1.0], &[1.0, 0.0]])), Err(Error::NotSkew(_))));
    }

    #[test]
    fn op_norm_matches_largest_singular_value() {
        let a = m(&[&[3.0, 0.0], &[4.0, 5.0]]);
        // Singular values are 3√5 and √5.
        assert_relative_eq!(op_norm(&a).unwrap(), 3.0 * 5f64.sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn orthonormalize_produces_orthogonal() {
        let a = m(&[&[1.0, 1.0, 0.0], &[1.0, 0.0, 1.0], &[0.0, 1.0, 1.0]]);
        let q = orthonormalize(&a).unwrap();
        let qtq = q.transpose().matmul(&q).unwrap();
        assert!((&qtq - &DenseMatrix::identity(3)).frobenius_norm() < 1e-14);
        let r = q.transpose().matmul(&a).unwrap();
        for i in 0..3 {
            assert!(r[(i, i)] > 0.0);
        }
    }
}
