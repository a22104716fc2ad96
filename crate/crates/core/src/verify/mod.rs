//! Samplers, the constants ledger, the `γ^(k)` estimator and the randomized
//! inequality suites.

mod gamma;
mod ledger;
mod report;
mod sampling;
mod suites;

pub use gamma::{definiteness_margin, estimate_gamma_uniform, GammaEstimate};
pub use ledger::{build_ledger, ConstantsLedger};
pub use report::{reports_to_csv, CheckSummary, SuiteParams, VerificationReport};
pub use sampling::{
    derive_seed, random_gaussian, random_orthogonal, random_skew, random_symmetric, sample_admissible, sample_rng,
    sample_sigma_slice,
};
pub use suites::{
    run_suite, suite_dconcavity, suite_minors, suite_prop31_34, suite_prop45, suite_prop51, suite_structure,
    SuiteConfig, INEQUALITY_TOL, MINOR_TOL, STRUCTURE_SLACK, SUITE_NAMES, TAU_GRID,
};
