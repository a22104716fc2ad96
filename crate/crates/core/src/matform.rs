//! `F_k(R) = log S_k(R)` on augmented matrices `R = ω + β`, where `S_k` is
//! the sum of the `k×k` principal minors.
//!
//! Derivatives come from the per-minor trace identities
//! `d log det A [M] = Tr(A⁻¹M)` and `d² log det A [M, N] = −Tr(A⁻¹MA⁻¹N)`,
//! so no `n²×n²` Hessian tensor is ever formed.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::linalg::{det_lu, invert, op_norm, skew_spectrum, sym_eigen, DenseMatrix, SymEigen};
use crate::sympoly::{elementary, GammaSchedule};
use crate::{Error, Result, ENUMERATION_BUDGET};

/// Relative slack of the admissibility comparisons.
pub const ADMISSIBLE_TOL: f64 = 1e-12;

/// `R` together with its symmetric part `ω`, skew part `β`, and the
/// eigendecomposition of `ω`.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedMatrix {
    r: DenseMatrix,
    omega: DenseMatrix,
    beta: DenseMatrix,
    eig: SymEigen,
}

impl AugmentedMatrix {
    pub fn new(r: DenseMatrix) -> Result<Self> {
        let omega = r.symmetric_part()?;
        let beta = r.skew_part()?;
        let eig = sym_eigen(&omega)?;
        Ok(Self { r, omega, beta, eig })
    }

    pub fn from_parts(omega: DenseMatrix, beta: DenseMatrix) -> Result<Self> {
        omega.check_symmetric()?;
        beta.check_skew()?;
        let r = omega.add_scaled(&beta, 1.0)?;
        Self::new(r)
    }

    pub fn n(&self) -> usize {
        self.r.rows()
    }

    pub fn r(&self) -> &DenseMatrix {
        &self.r
    }

    pub fn omega(&self) -> &DenseMatrix {
        &self.omega
    }

    pub fn beta(&self) -> &DenseMatrix {
        &self.beta
    }

    pub fn eigen(&self) -> &SymEigen {
        &self.eig
    }

    pub fn lambda_min(&self) -> f64 {
        self.eig.lambda_min()
    }

    pub fn beta_norm(&self) -> Result<f64> {
        op_norm(&self.beta)
    }
}

/// The admissible set `‖β‖ ≤ μ ≤ δ λ_min(ω)`, optionally restricted to
/// `λ(ω) ∈ Σ_(γ_k)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityParams {
    pub delta: f64,
    pub mu: f64,
    pub schedule: Option<GammaSchedule>,
}

impl AdmissibilityParams {
    pub fn new(delta: f64, mu: f64, schedule: Option<GammaSchedule>) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::BadDelta(delta));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::BadRange(format!("μ = {mu} must be finite and non-negative")));
        }
        Ok(Self { delta, mu, schedule })
    }
}

/// Strictly increasing 0-based row/column indices of a principal minor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MinorIndex(Vec<usize>);

impl MinorIndex {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::BadIndex { index: bad, n });
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadRange(format!("minor indices {indices:?} are not strictly increasing")));
        }
        Ok(Self(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `C(n, k)`.
pub fn minor_count(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

pub(crate) fn check_budget(n: usize, k: usize) -> Result<()> {
    let count = minor_count(n, k);
    if count > ENUMERATION_BUDGET {
        return Err(Error::TooLarge { n, k, count });
    }
    Ok(())
}

/// All k-subsets of `0..n` in lexicographic order.
pub fn minors(n: usize, k: usize) -> impl Iterator<Item = MinorIndex> {
    (0..n).combinations(k).map(MinorIndex)
}

fn check_minor(r: &DenseMatrix, idx: &MinorIndex) -> Result<()> {
    let n = r.square_dim()?;
    if let Some(&bad) = idx.0.iter().find(|&&i| i >= n) {
        return Err(Error::BadIndex { index: bad, n });
    }
    Ok(())
}

pub fn minor_matrix(r: &DenseMatrix, idx: &MinorIndex) -> Result<DenseMatrix> {
    check_minor(r, idx)?;
    Ok(r.principal(&idx.0))
}

pub fn minor_det(r: &DenseMatrix, idx: &MinorIndex) -> Result<f64> {
    det_lu(&minor_matrix(r, idx)?)
}

pub fn minor_log(r: &DenseMatrix, idx: &MinorIndex) -> Result<f64> {
    let det = minor_det(r, idx)?;
    if !(det > 0.0) {
        return Err(Error::NonPositiveMinor { index: idx.0.clone(), det });
    }
    Ok(det.ln())
}

fn check_degree(r: &DenseMatrix, k: usize) -> Result<usize> {
    let n = r.square_dim()?;
    if k == 0 || k > n {
        return Err(Error::BadDegree { k, n });
    }
    check_budget(n, k)?;
    Ok(n)
}

/// Sum of all `k×k` principal minors.
pub fn s_k(r: &DenseMatrix, k: usize) -> Result<f64> {
    let n = check_degree(r, k)?;
    minors(n, k).map(|idx| det_lu(&r.principal(&idx.0))).sum()
}

/// `F_k(R) = log S_k(R)`.
pub fn log_s_k(r: &DenseMatrix, k: usize) -> Result<f64> {
    let s = s_k(r, k)?;
    if !(s > 0.0) {
        return Err(Error::NonPositiveSk(s));
    }
    Ok(s.ln())
}

struct MinorData {
    index: Vec<usize>,
    det: f64,
    inv: DenseMatrix,
}

/// Per-minor determinants and inverses of `R`, reusable across several
/// derivative evaluations at the same point.
pub struct MinorExpansion {
    n: usize,
    minors: Vec<MinorData>,
    s_k: f64,
}

impl MinorExpansion {
    pub fn new(r: &DenseMatrix, k: usize) -> Result<Self> {
        let n = check_degree(r, k)?;
        let mut data = Vec::with_capacity(minor_count(n, k) as usize);
        let mut s = 0.0;
        for idx in minors(n, k) {
            let sub = r.principal(&idx.0);
            let det = det_lu(&sub)?;
            let inv = match invert(&sub) {
                Ok(inv) => inv,
                Err(Error::Singular) => return Err(Error::SingularMinor(idx.0)),
                Err(e) => return Err(e),
            };
            s += det;
            data.push(MinorData { index: idx.0, det, inv });
        }
        if !(s > 0.0) {
            return Err(Error::NonPositiveSk(s));
        }
        Ok(Self { n, minors: data, s_k: s })
    }

    pub fn s_k(&self) -> f64 {
        self.s_k
    }

    pub fn log_s_k(&self) -> f64 {
        self.s_k.ln()
    }

    /// `∂F_k/∂R_ij = S_k⁻¹ Σ_S G_S (R_S⁻¹)_{ji}`.
    pub fn gradient(&self) -> DenseMatrix {
        let mut g = DenseMatrix::zeros(self.n, self.n);
        for m in &self.minors {
            let w = m.det / self.s_k;
            for (a, &i) in m.index.iter().enumerate() {
                for (b, &j) in m.index.iter().enumerate() {
                    g[(i, j)] += w * m.inv[(b, a)];
                }
            }
        }
        g
    }

    /// Symmetric bilinear form of `d²F_k` at `R`. With `w_S = G_S/S_k` and
    /// `t_S(M) = Tr(R_S⁻¹ M_S)`:
    /// `Σ w_S [t_S(M) t_S(N) − Tr(R_S⁻¹M_S R_S⁻¹N_S)] − (Σ w_S t_S(M))(Σ w_S t_S(N))`.
    pub fn bilinear(&self, m: &DenseMatrix, n: &DenseMatrix) -> Result<f64> {
        for x in [m, n] {
            if x.rows() != self.n || x.cols() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, got: x.rows() });
            }
        }
        let (mut lin_m, mut lin_n, mut quad) = (0.0, 0.0, 0.0);
        for md in &self.minors {
            let w = md.det / self.s_k;
            let am = md.inv.matmul(&m.principal(&md.index))?;
            let an = md.inv.matmul(&n.principal(&md.index))?;
            let (tm, tn) = (am.trace(), an.trace());
            // Tr(XY) = Σ_ab X_ab Y_ba.
            let k = md.index.len();
            let mut tr2 = 0.0;
            for a in 0..k {
                for b in 0..k {
                    tr2 += am[(a, b)] * an[(b, a)];
                }
            }
            lin_m += w * tm;
            lin_n += w * tn;
            quad += w * (tm * tn - tr2);
        }
        Ok(quad - lin_m * lin_n)
    }

    pub fn d2(&self, m: &DenseMatrix) -> Result<f64> {
        self.bilinear(m, m)
    }
}

pub fn grad_log_s_k(r: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    Ok(MinorExpansion::new(r, k)?.gradient())
}

/// `d²F_k(R, M)`.
pub fn d2_log_s_k(r: &DenseMatrix, k: usize, m: &DenseMatrix) -> Result<f64> {
    MinorExpansion::new(r, k)?.d2(m)
}

/// `(P, Q) = ((M + Mᵀ)/2, (M − Mᵀ)/2)`.
pub fn split_pq(m: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    Ok((m.symmetric_part()?, m.skew_part()?))
}

/// The mixed term `H_k(R, P, Q)` computed two ways.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossTerm {
    /// `[d²F(P+Q) − d²F(P) − d²F(Q)] / 2`.
    pub polarized: f64,
    /// The bilinear form evaluated on `(P, Q)` directly.
    pub direct: f64,
}

pub fn cross_term(r: &DenseMatrix, k: usize, p: &DenseMatrix, q: &DenseMatrix) -> Result<CrossTerm> {
    let ex = MinorExpansion::new(r, k)?;
    let pq = p.add_scaled(q, 1.0)?;
    let polarized = 0.5 * (ex.d2(&pq)? - ex.d2(p)? - ex.d2(q)?);
    Ok(CrossTerm { polarized, direct: ex.bilinear(p, q)? })
}

/// `R` and a direction `M` expressed in the eigenbasis of `ω`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugateReduction {
    /// `D + β̃` with `D` the eigenvalues of `ω`, descending.
    pub r_tilde: DenseMatrix,
    pub m_tilde: DenseMatrix,
    pub eigenvalues: Vec<f64>,
    /// Orthogonal `V` with `ω = V D Vᵀ`; the conjugation is `X ↦ Vᵀ X V`.
    pub basis: DenseMatrix,
}

impl ConjugateReduction {
    pub fn conjugate(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.basis.transpose().matmul(x)?.matmul(&self.basis)
    }
}

/// Conjugates `R` and `M` by the orthogonal eigenbasis of `ω = sym(R)`.
/// `R̃` is assembled as `D + skew(Vᵀβ V)` so its symmetric part is exactly diagonal.
pub fn conjugate_reduce(r: &DenseMatrix, m: &DenseMatrix) -> Result<ConjugateReduction> {
    let aug = AugmentedMatrix::new(r.clone())?;
    if !(aug.lambda_min() > 0.0) {
        return Err(Error::NotPositiveDefinite(aug.lambda_min()));
    }
    let v = aug.eigen().vectors.clone();
    let vt = v.transpose();
    let beta_t = vt.matmul(aug.beta())?.matmul(&v)?.skew_part()?;
    let d = aug.eigen().values.clone();
    let r_tilde = DenseMatrix::diag(&d).add_scaled(&beta_t, 1.0)?;
    let m_tilde = vt.matmul(m)?.matmul(&v)?;
    Ok(ConjugateReduction { r_tilde, m_tilde, eigenvalues: d, basis: v })
}

/// `D^{−1/2} X D^{−1/2}`.
pub fn double_tilde(d: &[f64], x: &DenseMatrix) -> Result<DenseMatrix> {
    let n = x.square_dim()?;
    if d.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: d.len() });
    }
    if d.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::NotPositive);
    }
    let s: Vec<f64> = d.iter().map(|v| 1.0 / v.sqrt()).collect();
    Ok(DenseMatrix::from_fn(n, n, |i, j| s[i] * x[(i, j)] * s[j]))
}

/// Splits a reduced matrix into its positive diagonal and skew part.
fn split_reduced(r_tilde: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = r_tilde.square_dim()?;
    let sym = r_tilde.symmetric_part()?;
    let d = sym.diagonal();
    let scale = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..n {
        for j in 0..n {
            if i != j && sym[(i, j)].abs() > 1e-10 * scale {
                return Err(Error::BadRange("symmetric part is not diagonal".into()));
            }
        }
    }
    if let Some(&bad) = d.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::NotPositiveDefinite(bad));
    }
    Ok((d, r_tilde.skew_part()?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinorSigmaTilde {
    pub index: Vec<usize>,
    /// `‖σ̃_S‖` with `σ̃_S = D_S^{−1/2} β̃_S D_S^{−1/2}`.
    pub sigma_norm: f64,
    /// `|K_S|_F` with `K_S = sym((E + σ̃_S)⁻¹) − E`.
    pub k_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaTildeReport {
    pub k: usize,
    pub delta: f64,
    /// `δ`.
    pub sigma_bound: f64,
    /// `√k δ² / (1 − δ²)`.
    pub k_bound: f64,
    pub minors: Vec<MinorSigmaTilde>,
}

impl SigmaTildeReport {
    pub fn max_sigma_norm(&self) -> f64 {
        self.minors.iter().fold(0.0, |m, x| m.max(x.sigma_norm))
    }

    pub fn max_k_norm(&self) -> f64 {
        self.minors.iter().fold(0.0, |m, x| m.max(x.k_norm))
    }

    pub fn holds(&self, slack: f64) -> bool {
        self.max_sigma_norm() <= self.sigma_bound + slack && self.max_k_norm() <= self.k_bound + slack
    }
}

/// Normalized skew blocks `σ̃_S` and the symmetric remainder `K_S` of
/// `(E + σ̃_S)⁻¹` for every `k×k` principal block of `R̃ = D + β̃`.
pub fn sigma_tilde_diag(r_tilde: &DenseMatrix, k: usize, delta: f64) -> Result<SigmaTildeReport> {
    let n = check_degree(r_tilde, k)?;
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::BadDelta(delta));
    }
    let (d, beta) = split_reduced(r_tilde)?;
    let sigma = double_tilde(&d, &beta)?;
    let mut out = Vec::with_capacity(minor_count(n, k) as usize);
    for idx in minors(n, k) {
        let s = sigma.principal(&idx.0);
        let e = DenseMatrix::identity(k);
        let inv = match invert(&e.add_scaled(&s, 1.0)?) {
            Ok(inv) => inv,
            Err(_) => return Err(Error::SingularMinor(idx.0)),
        };
        let kmat = inv.symmetric_part()?.add_scaled(&e, -1.0)?;
        out.push(MinorSigmaTilde { index: idx.0, sigma_norm: op_norm(&s)?, k_norm: kmat.frobenius_norm() });
    }
    let d2 = delta * delta;
    Ok(SigmaTildeReport { k, delta, sigma_bound: delta, k_bound: (k as f64).sqrt() * d2 / (1.0 - d2), minors: out })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinorH {
    pub index: Vec<usize>,
    /// `G_S(R̃)/det D_S − 1`.
    pub h: f64,
    /// `Π(1 + η_j²) − 1` over the skew spectrum of `σ̃_S`.
    pub h_spectral: f64,
    /// `G_S(R̃) S_k(D) / (S_k(R̃) G_S(D)) − 1`.
    pub g: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HFactorReport {
    pub k: usize,
    pub delta: f64,
    /// `(2^⌊k/2⌋ − 1) δ²`.
    pub bound: f64,
    /// `Σ_S h_S det D_S / S_k(D)`.
    pub h_k: f64,
    pub minors: Vec<MinorH>,
}

impl HFactorReport {
    pub fn holds(&self, slack: f64) -> bool {
        let b = self.bound + slack;
        self.h_k >= -slack && self.h_k <= b && self.minors.iter().all(|m| m.h >= -slack && m.h <= b && m.g.abs() <= b)
    }

    /// Largest `|h_S − h_spectral_S|`.
    pub fn spectral_mismatch(&self) -> f64 {
        self.minors.iter().fold(0.0, |m, x| m.max((x.h - x.h_spectral).abs()))
    }
}

pub fn h_factors(r_tilde: &DenseMatrix, k: usize, delta: f64) -> Result<HFactorReport> {
    let n = check_degree(r_tilde, k)?;
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::BadDelta(delta));
    }
    let (d, beta) = split_reduced(r_tilde)?;
    let sigma = double_tilde(&d, &beta)?;
    let sk_d = elementary(k, &d);
    let sk_r = s_k(r_tilde, k)?;
    let mut out = Vec::with_capacity(minor_count(n, k) as usize);
    let mut h_k = 0.0;
    for idx in minors(n, k) {
        let g_r = det_lu(&r_tilde.principal(&idx.0))?;
        let g_d: f64 = idx.0.iter().map(|&i| d[i]).product();
        let h = g_r / g_d - 1.0;
        let eta = skew_spectrum(&sigma.principal(&idx.0))?;
        let h_spectral = eta.iter().map(|e| 1.0 + e * e).product::<f64>() - 1.0;
        let g = g_r * sk_d / (sk_r * g_d) - 1.0;
        h_k += h * g_d;
        out.push(MinorH { index: idx.0, h, h_spectral, g });
    }
    Ok(HFactorReport { k, delta, bound: ((1u64 << (k / 2)) - 1) as f64 * delta * delta, h_k: h_k / sk_d, minors: out })
}

/// Membership in the admissible set; never errors.
pub fn in_admissible(r: &DenseMatrix, params: &AdmissibilityParams) -> bool {
    let Ok(aug) = AugmentedMatrix::new(r.clone()) else {
        return false;
    };
    let lmin = aug.lambda_min();
    if !(lmin > 0.0) {
        return false;
    }
    let Ok(bn) = aug.beta_norm() else {
        return false;
    };
    let tol = 1.0 + ADMISSIBLE_TOL;
    if bn > params.mu * tol || params.mu > params.delta * lmin * tol {
        return false;
    }
    match &params.schedule {
        None => true,
        Some(s) => {
            let vals = &aug.eigen().values;
            vals.len() == s.n && lmin >= s.gamma_k * aug.eigen().lambda_max() * (1.0 - ADMISSIBLE_TOL)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    n: usize,
    entries: Vec<Vec<f64>>,
}

/// Parses `{"n": int, "entries": [[row-major floats]]}`.
pub fn matrix_from_json(text: &str) -> Result<DenseMatrix> {
    let f: MatrixFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if f.entries.len() != f.n || f.entries.iter().any(|row| row.len() != f.n) {
        return Err(Error::Parse(format!("entries do not form a {0}x{0} matrix", f.n)));
    }
    DenseMatrix::from_rows(&f.entries)
}

pub fn matrix_to_json(m: &DenseMatrix) -> Result<String> {
    let n = m.square_dim()?;
    let f = MatrixFile { n, entries: m.to_rows() };
    serde_json::to_string(&f).map_err(|e| Error::Parse(e.to_string()))
}
