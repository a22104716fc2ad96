//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

// NaN must count as a failure, hence `!(x <= tol)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hessk::linalg::{det_lu, op_norm, DenseMatrix};
use hessk::matform::{
    conjugate_reduce, d2_log_s_k, double_tilde, grad_log_s_k, log_s_k, minor_count, s_k, AdmissibilityParams,
};
use hessk::oracle::{charpoly_ek, fd_grad_matrix, fd_second_directional_matrix, subset_d2f, subset_sigma, FdConfig};
use hessk::scalarform::{a_coeff, d2f, d2f_tilde, g_matrix, tilde_coeff_matrix};
use hessk::sympoly::{gamma_schedule, Spectrum};
use hessk::verify::{
    estimate_gamma_uniform, random_gaussian, run_suite, sample_admissible, sample_rng, sample_sigma_slice, SuiteConfig,
};
use rand::Rng;

const FREE_GAMMA: f64 = 0.5;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn rel(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor).max(f64::MIN_POSITIVE)
}

fn grid(n_min: usize, n_max: usize) -> impl Iterator<Item = (usize, usize)> {
    (n_min..=n_max).flat_map(|n| (2..n).map(move |k| (n, k)))
}

fn log_uniform_spectrum(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| 10f64.powf(rng.random_range(-1.0..1.0))).collect()
}

fn c1_g2_determinant() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 3..=12 {
        let mut rng = sample_rng(1, n as u64);
        let lambda = Spectrum::new(log_uniform_spectrum(n, &mut rng)).map_err(|e| e.to_string())?;
        let det = det_lu(&g_matrix(2, &lambda).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let expected = sign * (n - 1) as f64;
        let r = rel(det, expected, 0.0);
        worst = worst.max(r);
        if r > 1e-9 {
            return Err(format!("n = {n}: det = {det}, expected {expected}"));
        }
    }
    Ok(format!("n = 3..12, worst relative error {worst:.2e}"))
}

fn c2_scalar_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (n, k) in grid(3, 8) {
        let mut rng = sample_rng(2, (n * 100 + k) as u64);
        for _ in 0..1000 {
            let lambda = Spectrum::new(log_uniform_spectrum(n, &mut rng)).unwrap();
            let xi: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let eta2: f64 = xi.iter().zip(lambda.values()).map(|(x, l)| (x / l).powi(2)).sum();
            let a = d2f(k, &lambda, &xi).map_err(|e| e.to_string())?;
            let b = subset_d2f(k, &lambda, &xi).map_err(|e| e.to_string())?;
            let r = rel(a, b, eta2);
            worst = worst.max(r);
            count += 1;
            if !(r <= 1e-9) {
                return Err(format!("(n, k) = ({n}, {k}), λ = {:?}: {a} vs {b}", lambda.values()));
            }
        }
    }
    Ok(format!("{count} probes, worst relative error {worst:.2e}"))
}

fn c3_matrix_fd() -> Outcome {
    let fd1 = FdConfig::new(1e-5).unwrap();
    let fd2 = FdConfig::new(1e-4).unwrap();
    let (mut worst_g, mut worst_h): (f64, f64) = (0.0, 0.0);
    let mut count = 0;
    for (n, k) in grid(3, 6) {
        let sched = gamma_schedule(n, k, Some(FREE_GAMMA)).unwrap();
        let params = AdmissibilityParams::new(0.1, 1.0, Some(sched)).unwrap();
        let mut rng = sample_rng(3, (n * 100 + k) as u64);
        for _ in 0..100 {
            let aug = sample_admissible(n, &params, &mut rng).map_err(|e| e.to_string())?;
            let r = aug.r();
            let m = random_gaussian(n, n, &mut rng);
            let f = |x: &DenseMatrix| log_s_k(x, k).unwrap_or(f64::NAN);

            let g = grad_log_s_k(r, k).map_err(|e| e.to_string())?;
            let g_fd = fd_grad_matrix(f, r, fd1).map_err(|e| e.to_string())?;
            let diff = g.add_scaled(&g_fd, -1.0).unwrap().frobenius_norm();
            let rg = diff / g.frobenius_norm().max(g_fd.frobenius_norm());
            worst_g = worst_g.max(rg);
            if !(rg <= 1e-6) {
                return Err(format!("gradient, (n, k) = ({n}, {k}): relative error {rg:.3e}"));
            }

            let h = d2_log_s_k(r, k, &m).map_err(|e| e.to_string())?;
            let h_fd = fd_second_directional_matrix(f, r, &m, fd2).map_err(|e| e.to_string())?;
            let red = conjugate_reduce(r, &m).map_err(|e| e.to_string())?;
            let mtt = double_tilde(&red.eigenvalues, &red.m_tilde).map_err(|e| e.to_string())?;
            let rh = rel(h, h_fd, mtt.frobenius_norm().powi(2));
            worst_h = worst_h.max(rh);
            if !(rh <= 1e-5) {
                return Err(format!("d2F, (n, k) = ({n}, {k}): {h} vs {h_fd}"));
            }
            count += 1;
        }
    }
    Ok(format!("{count} pairs, worst gradient error {worst_g:.2e}, worst d2F error {worst_h:.2e}"))
}

fn c4_charpoly() -> Outcome {
    let n = 8;
    let mut rng = sample_rng(4, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a = random_gaussian(n, n, &mut rng);
        let e = charpoly_ek(&a).map_err(|e| e.to_string())?;
        let norm = op_norm(&a).map_err(|e| e.to_string())?;
        for k in 1..=n {
            let sk = s_k(&a, k).map_err(|e| e.to_string())?;
            let scale = minor_count(n, k) as f64 * norm.powi(k as i32);
            let r = (sk - e[k - 1]).abs() / scale;
            worst = worst.max(r);
            if !(r <= 1e-8) {
                return Err(format!("k = {k}: S_k = {sk}, e_k = {}", e[k - 1]));
            }
        }
    }
    Ok(format!("100 matrices of size 8, k = 1..8, worst scaled error {worst:.2e}"))
}

fn c5_homogeneity() -> Outcome {
    let mut worst: f64 = 0.0;
    for (n, k) in grid(3, 10) {
        let sched = gamma_schedule(n, k, Some(FREE_GAMMA)).unwrap();
        for i in 0..1000 {
            let lambda = sample_sigma_slice(&sched, &mut sample_rng(5, (n * 100 + k) as u64 * 10_000 + i));
            let v = d2f(k, &lambda, lambda.values()).map_err(|e| e.to_string())?;
            let err = (v + k as f64).abs();
            worst = worst.max(err);
            if !(err <= 1e-10) {
                return Err(format!("(n, k) = ({n}, {k}): d2f(λ, λ) = {v}"));
            }
        }
    }
    Ok(format!("n = 3..10, all k, worst |d2f(λ, λ) + k| = {worst:.2e}"))
}

fn c6_uniform_definiteness() -> Outcome {
    let mut lines = Vec::new();
    let mut min_gamma = f64::INFINITY;
    for (n, k) in grid(3, 10) {
        let sched = gamma_schedule(n, k, Some(FREE_GAMMA)).unwrap();
        let mut max_eig = f64::NEG_INFINITY;
        for i in 0..10_000u64 {
            let lambda = sample_sigma_slice(&sched, &mut sample_rng(6, (n * 100 + k) as u64 * 100_000 + i));
            let e = tilde_coeff_matrix(k, &lambda).and_then(|m| m.max_eigenvalue()).map_err(|e| e.to_string())?;
            if !(e < 0.0) {
                return Err(format!("(n, k) = ({n}, {k}): λ_max = {e} at {:?}", lambda.values()));
            }
            max_eig = max_eig.max(e);
        }
        let est = estimate_gamma_uniform(&sched, 2000, 6).map_err(|e| format!("(n, k) = ({n}, {k}): {e}"))?;
        min_gamma = min_gamma.min(est.value);
        lines.push(format!("({n},{k},{}) max λ = {max_eig:.3e}, γ^(k) ≈ {:.3e}", sched.branch.as_str(), est.value));
    }
    for l in &lines {
        println!("      {l}");
    }
    Ok(format!("36 cells x 10^4 samples, all negative definite, smallest γ^(k) ≈ {min_gamma:.3e}"))
}

fn suite_clean(name: &str, n: usize, k: usize, delta: f64, samples: usize) -> Result<String, String> {
    let cfg = SuiteConfig::new(n, k, delta, FREE_GAMMA, samples, 8).map_err(|e| e.to_string())?;
    let r = run_suite(name, &cfg).map_err(|e| format!("{name} at ({n},{k},{delta}): {e}"))?;
    let worst = r.worst_margin.map_or("none".to_owned(), |m| format!("{m:.2e}"));
    if r.violations > 0 {
        let bad: Vec<String> =
            r.checks.iter().filter(|c| c.violations > 0).map(|c| format!("{} x{}", c.name, c.violations)).collect();
        return Err(format!("{name} at ({n},{k},{delta}): {}", bad.join(", ")));
    }
    Ok(format!("{name}({n},{k}) worst {worst}"))
}

fn suites_clean(names: &[&str], cases: &[(usize, usize, f64)], samples: usize) -> Outcome {
    let mut parts = Vec::new();
    for &(n, k, d) in cases {
        for name in names {
            parts.push(suite_clean(name, n, k, d, samples)?);
        }
    }
    Ok(parts.join("; "))
}

fn c7_structure() -> Outcome {
    suites_clean(&["structure"], &[(4, 2, 0.1), (5, 3, 0.1), (6, 4, 0.1)], 1000)
}

fn c8_inequalities() -> Outcome {
    suites_clean(&["prop31_34", "prop51", "dconcavity"], &[(5, 3, 0.05), (6, 4, 0.05)], 1000)
}

fn c9_minors() -> Outcome {
    suites_clean(&["minors"], &[(5, 3, 0.05), (6, 4, 0.05)], 1000)
}

fn c10_determinism() -> Outcome {
    for name in ["dconcavity", "structure"] {
        let cfg = SuiteConfig::new(5, 3, 0.05, FREE_GAMMA, 200, 10).map_err(|e| e.to_string())?;
        let a = run_suite(name, &cfg).map_err(|e| e.to_string())?.to_json();
        let b = run_suite(name, &cfg).map_err(|e| e.to_string())?.to_json();
        if a != b {
            return Err(format!("{name}: reports differ"));
        }
    }
    Ok("dconcavity and structure reports byte-identical on repeat".into())
}

/// `[σ_{k−1}^{(ij)}]² − σ_k^{(ij)} σ_{k−2}^{(ij)}` by literal subset sums.
fn a_oracle(k: usize, x: &[f64], i: usize, j: usize) -> f64 {
    let rest: Vec<f64> = x.iter().enumerate().filter(|&(p, _)| p != i && p != j).map(|(_, &v)| v).collect();
    let s = |m: usize| if m == 0 { 1.0 } else { subset_sigma(m, &rest).unwrap() };
    s(k - 1).powi(2) - s(k) * s(k - 2)
}

fn c11_coefficients() -> Outcome {
    let doc = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/coefficients.md");
    let text = std::fs::read_to_string(&doc).map_err(|e| format!("{}: {e}", doc.display()))?;
    if !text.contains("hessian_implied") || !text.contains("halved") {
        return Err("coefficient comparison missing from docs/coefficients.md".into());
    }
    let mut worst_form: f64 = 0.0;
    let mut worst_entry: f64 = 0.0;
    let mut rng = sample_rng(11, 0);
    for probe in 0..1000 {
        let n = 3 + probe % 6;
        let k = 2 + (probe / 6) % (n - 2);
        let lambda = Spectrum::new(log_uniform_spectrum(n, &mut rng)).unwrap();
        let eta: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m = tilde_coeff_matrix(k, &lambda).map_err(|e| e.to_string())?;
        let q = m.value(&eta).map_err(|e| e.to_string())?;
        let direct = d2f_tilde(k, &lambda, &eta).map_err(|e| e.to_string())?;
        let xi: Vec<f64> = lambda.values().iter().zip(&eta).map(|(l, e)| l * e).collect();
        let oracle = subset_d2f(k, &lambda, &xi).map_err(|e| e.to_string())?;
        let eta2: f64 = eta.iter().map(|e| e * e).sum();
        let r = rel(q, direct, eta2).max(rel(q, oracle, eta2));
        worst_form = worst_form.max(r);
        if !(r <= 1e-9) {
            return Err(format!("form mismatch at (n, k) = ({n}, {k}): {q} vs {direct} vs {oracle}"));
        }
        let x = lambda.values();
        let sk = subset_sigma(k, x).unwrap();
        for i in 0..n {
            for j in i + 1..n {
                let a = a_oracle(k, x, i, j);
                let expected = -x[i] * x[j] * a / (sk * sk);
                let re = rel(m.entries()[(i, j)], expected, 0.0);
                let shipped = a_coeff(k, &lambda, i, j).map_err(|e| e.to_string())?.hessian_implied;
                let re = re.max(rel(shipped, a, 0.0));
                worst_entry = worst_entry.max(re);
                if !(re <= 1e-9) {
                    return Err(format!("a_ij mismatch at (n, k, i, j) = ({n}, {k}, {i}, {j})"));
                }
            }
        }
    }
    let ones = Spectrum::new(vec![1.0; 4]).unwrap();
    let c = a_coeff(2, &ones, 0, 1).map_err(|e| e.to_string())?;
    Ok(format!(
        "1000 probes, worst form error {worst_form:.2e}, worst a_ij error {worst_entry:.2e}; at 1⁴, k = 2: halved {} vs hessian_implied {}",
        c.halved, c.hessian_implied
    ))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "closed-form det G_2", budget: Some(Duration::from_secs(1)), run: c1_g2_determinant },
        Criterion {
            id: 2,
            name: "scalar oracle equivalence",
            budget: Some(Duration::from_secs(60)),
            run: c2_scalar_oracle,
        },
        Criterion {
            id: 3,
            name: "matrix finite differences",
            budget: Some(Duration::from_secs(120)),
            run: c3_matrix_fd,
        },
        Criterion { id: 4, name: "characteristic polynomial identity", budget: None, run: c4_charpoly },
        Criterion { id: 5, name: "homogeneity pin", budget: None, run: c5_homogeneity },
        Criterion {
            id: 6,
            name: "uniform negative definiteness",
            budget: Some(Duration::from_secs(600)),
            run: c6_uniform_definiteness,
        },
        Criterion { id: 7, name: "structural bounds", budget: None, run: c7_structure },
        Criterion { id: 8, name: "inequality suites", budget: Some(Duration::from_secs(600)), run: c8_inequalities },
        Criterion { id: 9, name: "minor positivity chain", budget: None, run: c9_minors },
        Criterion { id: 10, name: "determinism", budget: None, run: c10_determinism },
        Criterion { id: 11, name: "coefficient resolution", budget: None, run: c11_coefficients },
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in criteria.iter().filter(|c| filter.is_empty() || filter.contains(&c.id)) {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {elapsed:.2?}, budget {b:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS [{:>2}] {}: {detail} ({elapsed:.2?})", c.id, c.name),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{:>2}] {}: {detail} ({elapsed:.2?})", c.id, c.name);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
