use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("entry array of length {len} does not match a {rows}x{cols} matrix")]
    Shape { rows: usize, cols: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid matrix JSON: {0}")]
    Parse(String),

    #[error("non-finite value at position {0}")]
    NonFiniteEntry(usize),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (|A - Aᵀ|_F = {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not skew-symmetric (|B + Bᵀ|_F = {0:e})")]
    NotSkew(f64),

    #[error("Jacobi iteration did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("degree {k} is out of range for a spectrum of length {n}")]
    BadDegree { k: usize, n: usize },

    #[error("index {index} is invalid for dimension {n}")]
    BadIndex { index: usize, n: usize },

    #[error("spectrum must have at least two entries, got {0}")]
    SpectrumTooShort(usize),

    #[error("all entries must be strictly positive")]
    NotPositive,

    #[error("σ_k(λ) = {0:e} is not positive")]
    NonPositiveSigma(f64),

    #[error("S_k(R) = {0:e} is not positive")]
    NonPositiveSk(f64),

    #[error("principal minor {index:?} has non-positive determinant {det:e}")]
    NonPositiveMinor { index: Vec<usize>, det: f64 },

    #[error("principal minor {0:?} is singular")]
    SingularMinor(Vec<usize>),

    #[error("symmetric part is not positive definite (λ_min = {0:e})")]
    NotPositiveDefinite(f64),

    #[error("C({n},{k}) = {count} subsets exceed the enumeration budget")]
    TooLarge { n: usize, k: usize, count: u128 },

    #[error("k = {k} lies in the free branch for n = {n}; a γ_k in (0,1) is required")]
    MissingFreeGamma { n: usize, k: usize },

    #[error("parameter out of range: {0}")]
    BadRange(String),

    #[error("δ = {0} must lie in [0, 1)")]
    BadDelta(f64),

    #[error("infeasible sampling parameters: {0}")]
    InfeasibleParams(String),

    #[error("function evaluated to a non-finite value during differencing")]
    NonFinite,

    #[error("uniform definiteness estimate {value:e} is not positive")]
    NonPositiveEstimate { value: f64, lambda: Vec<f64> },

    #[error("k = {k} is not in the mid-range branch for n = {n}")]
    BadBranch { n: usize, k: usize },
}
