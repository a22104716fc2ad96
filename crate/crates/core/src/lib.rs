//! Second-order calculus for the k-Hessian type functions
//! `f_k(λ) = log σ_k(λ)` and `F_k(R) = log S_k(R)` on augmented matrices
//! `R = ω + β`, together with the machinery needed to certify their concavity
//! estimates numerically.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: a small dense kernel (LU, Jacobi eigensolver, skew spectra).
//! * [`sympoly`]: elementary symmetric polynomials, deleted variants and the
//!   cone hierarchy `Γ_n ⊂ Γ_k`, `Σ_(γ_k)`.
//! * [`scalarform`]: derivatives of `f_k` and the reduced quadratic form.
//! * [`matform`]: principal-minor calculus for `F_k` and the structural
//!   diagnostics of the conjugate-reduced matrix `D + β̃`.
//! * [`oracle`]: independent ground truth (finite differences, subset
//!   enumeration, Faddeev–LeVerrier).
//! * [`verify`]: samplers, the constants ledger and the inequality suites.
//! * [`cli`]: the `hessk` batch front end.

// `!(x > 0.0)` is deliberate throughout: NaN must fail positivity tests.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
mod error;
pub mod linalg;
pub mod matform;
pub mod oracle;
pub mod scalarform;
pub mod sympoly;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, SymEigen};
pub use matform::{AdmissibilityParams, AugmentedMatrix, MinorIndex};
pub use scalarform::{QuadraticFormMatrix, TermDecomposition};
pub use sympoly::{Branch, GammaSchedule, Spectrum};
pub use verify::{ConstantsLedger, VerificationReport};

/// Largest number of k-subsets any enumerating routine will visit.
pub const ENUMERATION_BUDGET: u128 = 1_000_000;
