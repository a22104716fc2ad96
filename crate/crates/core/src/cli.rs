//! The `hessk` command line. [`run`] is the whole program minus process
//! exit, so it can be driven from tests.
//!
//! Exit codes: 0 on success, 1 on usage or I/O errors, 2 when a suite
//! records violations.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::linalg::DenseMatrix;
use crate::matform::{grad_log_s_k, in_admissible, log_s_k, matrix_from_json, s_k, AdmissibilityParams};
use crate::scalarform::{f_k, tilde_coeff_matrix};
use crate::sympoly::{gamma_schedule, in_gamma_cone, in_sigma_gamma, sigma, Branch, Spectrum};
use crate::verify::{
    build_ledger, estimate_gamma_uniform, reports_to_csv, run_suite, SuiteConfig, VerificationReport, SUITE_NAMES,
};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "HESSK_THREADS";

#[derive(Parser, Debug)]
#[command(name = "hessk", version, about = "Numerical checks for log S_k on augmented matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a single function at a spectrum or matrix.
    Eval(EvalArgs),
    /// Test membership of a spectrum in Γ_k and, with --gamma or a fixed schedule, in Σ_(γ_k).
    CheckCone(ConeArgs),
    /// Test membership of a matrix in the admissible set.
    CheckAdmissible(AdmissibleArgs),
    /// Estimate the uniform definiteness constant γ^(k).
    EstimateGamma(GammaArgs),
    /// Print the constants ledger.
    Ledger(LedgerArgs),
    /// Run an inequality suite.
    Verify(VerifyArgs),
    /// Run the d-concavity suite over a grid of (n, k).
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EvalFn {
    #[value(name = "sigma")]
    Sigma,
    #[value(name = "fk")]
    Fk,
    #[value(name = "Sk")]
    Sk,
    #[value(name = "Fk")]
    BigFk,
    #[value(name = "gradFk")]
    GradFk,
    #[value(name = "tilde-max-eig")]
    TildeMaxEig,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(clap::Args, Debug)]
struct Source {
    /// Comma-separated spectrum, e.g. 1,2,3.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lambda: Option<Vec<f64>>,
    /// Matrix file in the {"n": .., "entries": [[..]]} format.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
struct EvalArgs {
    #[arg(long = "fn", value_enum)]
    function: EvalFn,
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    source: Source,
}

#[derive(clap::Args, Debug)]
struct ConeArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    lambda: Vec<f64>,
    #[arg(long)]
    k: usize,
    /// γ_k for the free branch.
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(clap::Args, Debug)]
struct AdmissibleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    mu: f64,
    /// Also require λ(ω) ∈ Σ_(γ_k) for this k.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(clap::Args, Debug)]
struct GammaArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// γ_k for the free branch; ignored elsewhere.
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(clap::Args, Debug)]
struct LedgerArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    /// Samples spent on estimating γ^(k).
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(clap::Args, Debug)]
struct Common {
    #[arg(long)]
    delta: f64,
    /// Bound on ‖β‖; the sampler rescales ω so that μ ≤ δ λ_min(ω).
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Samples spent on estimating γ^(k) for the ledger.
    #[arg(long, default_value_t = 2000)]
    gamma_budget: usize,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Record wall time in reports (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(clap::Args, Debug)]
struct VerifyArgs {
    /// prop31_34, prop51, dconcavity, prop45, structure, minors or all.
    #[arg(long)]
    suite: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(clap::Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    n_min: usize,
    #[arg(long)]
    n_max: usize,
    #[command(flatten)]
    common: Common,
    /// Directory for SVG plots.
    #[arg(long)]
    plot_dir: Option<PathBuf>,
}

/// Parses `args` (program name first) and executes the command.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            return 1;
        }
    };
    match pool.install(|| execute(cli.command, out, err)) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}

fn thread_pool() -> anyhow::Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().with_context(|| format!("{THREADS_ENV}={v:?} is not a thread count"))?;
        b = b.num_threads(n);
    }
    Ok(b.build()?)
}

fn execute(cmd: Command, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> anyhow::Result<i32> {
    match cmd {
        Command::Eval(a) => emit_json(out, &eval(&a)?),
        Command::CheckCone(a) => {
            let s = Spectrum::new(a.lambda)?;
            let mut v = json!({ "in_gamma_cone": in_gamma_cone(&s, a.k) });
            if s.len() >= 3 && (2..s.len()).contains(&a.k) {
                if let Ok(sched) = gamma_schedule(s.len(), a.k, a.gamma) {
                    v["gamma_k"] = json!(sched.gamma_k);
                    v["in_sigma_gamma"] = json!(in_sigma_gamma(&s, &sched));
                }
            }
            emit_json(out, &v)
        }
        Command::CheckAdmissible(a) => {
            let r = read_matrix(&a.input)?;
            let schedule = match a.k {
                Some(k) => Some(gamma_schedule(r.rows(), k, a.gamma)?),
                None => None,
            };
            let p = AdmissibilityParams::new(a.delta, a.mu, schedule)?;
            emit_json(out, &json!({ "admissible": in_admissible(&r, &p) }))
        }
        Command::EstimateGamma(a) => {
            let sched = gamma_schedule(a.n, a.k, Some(a.gamma))?;
            let e = estimate_gamma_uniform(&sched, a.samples, a.seed)?;
            emit_json(
                out,
                &json!({
                    "n": a.n, "k": a.k, "gamma_k": sched.gamma_k, "branch": sched.branch,
                    "gamma_k_uniform": e.value, "argmin": e.argmin,
                    "evaluations": e.evaluations, "seed": a.seed,
                }),
            )
        }
        Command::Ledger(a) => {
            let sched = gamma_schedule(a.n, a.k, Some(a.gamma))?;
            let e = estimate_gamma_uniform(&sched, a.samples, a.seed)?;
            emit_json(out, &build_ledger(a.n, a.k, a.delta, &sched, e.value)?)
        }
        Command::Verify(a) => verify(a, out, err),
        Command::Sweep(a) => sweep(a, out, err),
    }
}

fn emit_json(out: &mut (dyn Write + Send), v: &impl Serialize) -> anyhow::Result<i32> {
    writeln!(out, "{}", serde_json::to_string_pretty(v)?)?;
    Ok(0)
}

fn read_matrix(path: &Path) -> anyhow::Result<DenseMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    matrix_from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn eval(a: &EvalArgs) -> anyhow::Result<serde_json::Value> {
    let spectrum = || -> anyhow::Result<Spectrum> {
        match &a.source.lambda {
            Some(l) => Ok(Spectrum::new(l.clone())?),
            None => bail!("--lambda is required for this function"),
        }
    };
    let matrix = || -> anyhow::Result<DenseMatrix> {
        match (&a.source.input, &a.source.lambda) {
            (Some(p), _) => read_matrix(p),
            (None, Some(l)) => Ok(DenseMatrix::diag(l)),
            (None, None) => bail!("--input or --lambda is required"),
        }
    };
    let value = match a.function {
        EvalFn::Sigma => json!(sigma(a.k, &spectrum()?)?),
        EvalFn::Fk => json!(f_k(a.k, &spectrum()?)?),
        EvalFn::Sk => json!(s_k(&matrix()?, a.k)?),
        EvalFn::BigFk => json!(log_s_k(&matrix()?, a.k)?),
        EvalFn::GradFk => json!(grad_log_s_k(&matrix()?, a.k)?.to_rows()),
        EvalFn::TildeMaxEig => json!(tilde_coeff_matrix(a.k, &spectrum()?)?.max_eigenvalue()?),
    };
    let name = a.function.to_possible_value().map(|p| p.get_name().to_owned()).unwrap_or_default();
    Ok(json!({ "fn": name, "k": a.k, "value": value }))
}

fn suite_config(n: usize, k: usize, c: &Common) -> anyhow::Result<SuiteConfig> {
    let mut cfg = SuiteConfig::new(n, k, c.delta, c.gamma, c.samples, c.seed)?;
    cfg.mu = c.mu;
    cfg.gamma_budget = c.gamma_budget;
    Ok(cfg)
}

fn timed(name: &str, cfg: &SuiteConfig, timing: bool) -> crate::Result<VerificationReport> {
    let start = Instant::now();
    let mut r = run_suite(name, cfg)?;
    if timing {
        r.wall_ms = Some(start.elapsed().as_millis() as u64);
    }
    Ok(r)
}

fn write_output(c: &Common, out: &mut (dyn Write + Send), text: &str) -> anyhow::Result<()> {
    match &c.output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn render(reports: &[VerificationReport], single: bool, format: Format) -> anyhow::Result<String> {
    Ok(match format {
        Format::Csv => reports_to_csv(reports),
        Format::Json if single => reports[0].to_json() + "\n",
        Format::Json => serde_json::to_string_pretty(reports)? + "\n",
    })
}

fn verify(a: VerifyArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> anyhow::Result<i32> {
    let cfg = suite_config(a.n, a.k, &a.common)?;
    let names: Vec<&str> = if a.suite == "all" {
        SUITE_NAMES
            .iter()
            .copied()
            .filter(|&s| {
                let keep = s != "prop45" || cfg.schedule.branch == Branch::Midrange;
                if !keep {
                    let _ = writeln!(err, "note: skipping prop45, k = {} is not mid-range for n = {}", a.k, a.n);
                }
                keep
            })
            .collect()
    } else if SUITE_NAMES.contains(&a.suite.as_str()) {
        vec![a.suite.as_str()]
    } else {
        bail!("unknown suite {:?}; expected one of {} or all", a.suite, SUITE_NAMES.join(", "));
    };
    // The γ^(k) estimate is shared by every suite of one invocation.
    let mut cfg = cfg;
    cfg.gamma_uniform = Some(cfg.ledger()?.gamma_k_uniform);
    let reports = names.iter().map(|name| timed(name, &cfg, a.common.timing)).collect::<crate::Result<Vec<_>>>()?;
    write_output(&a.common, out, &render(&reports, a.suite != "all", a.common.format)?)?;
    Ok(if reports.iter().all(VerificationReport::passed) { 0 } else { 2 })
}

#[derive(Serialize)]
struct SweepCell {
    n: usize,
    k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<VerificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn sweep(a: SweepArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> anyhow::Result<i32> {
    let mut cells = Vec::new();
    for n in a.n_min.max(3)..=a.n_max {
        for k in 2..n {
            let result = suite_config(n, k, &a.common)
                .map_err(|e| e.to_string())
                .and_then(|cfg| timed("dconcavity", &cfg, a.common.timing).map_err(|e| e.to_string()));
            match result {
                Ok(r) => cells.push(SweepCell { n, k, report: Some(r), error: None }),
                Err(e) => {
                    writeln!(err, "cell (n = {n}, k = {k}) failed: {e}")?;
                    cells.push(SweepCell { n, k, report: None, error: Some(e) });
                }
            }
        }
    }
    let reports: Vec<VerificationReport> = cells.iter().filter_map(|c| c.report.clone()).collect();
    let text = match a.common.format {
        Format::Json => serde_json::to_string_pretty(&cells)? + "\n",
        Format::Csv => reports_to_csv(&reports),
    };
    write_output(&a.common, out, &text)?;
    if let Some(dir) = &a.plot_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("gamma_uniform.svg"), heatmap_svg(&reports))?;
        fs::write(dir.join("dconcavity_margin.svg"), margin_svg(&reports))?;
    }
    let clean = cells.iter().all(|c| c.report.as_ref().is_some_and(VerificationReport::passed));
    Ok(if clean { 0 } else { 2 })
}

const CELL: f64 = 36.0;
const PAD: f64 = 48.0;

/// Heat map of the estimated γ^(k) over the (n, k) grid, log-scaled colors.
fn heatmap_svg(reports: &[VerificationReport]) -> String {
    let n_max = reports.iter().map(|r| r.params.n).max().unwrap_or(3);
    let n_min = reports.iter().map(|r| r.params.n).min().unwrap_or(3);
    let cols = n_max.saturating_sub(2).max(1);
    let rows = n_max - n_min + 1;
    let (w, h) = (PAD * 2.0 + CELL * cols as f64, PAD * 2.0 + CELL * rows as f64);
    let logs: Vec<f64> = reports.iter().map(|r| r.ledger.gamma_k_uniform.max(1e-300).log10()).collect();
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="10">"#
    );
    let _ =
        writeln!(s, r#"<text x="{PAD}" y="20" font-size="12">estimated γ^(k), log10 scale (columns k, rows n)</text>"#);
    for (r, l) in reports.iter().zip(&logs) {
        let t = if hi > lo { (l - lo) / (hi - lo) } else { 0.5 };
        let (red, blue) = ((255.0 * (1.0 - t)) as u8, (255.0 * t) as u8);
        let x = PAD + CELL * (r.params.k - 2) as f64;
        let y = PAD + CELL * (r.params.n - n_min) as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="rgb({red},64,{blue})"><title>n={} k={} γ={:e}</title></rect>"#,
            r.params.n, r.params.k, r.ledger.gamma_k_uniform
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="white" text-anchor="middle">{:.1}</text>"#,
            x + CELL / 2.0,
            y + CELL / 2.0 + 3.0,
            l
        );
    }
    for n in n_min..=n_max {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">n={n}</text>"#,
            PAD - 4.0,
            PAD + CELL * (n - n_min) as f64 + CELL / 2.0 + 3.0
        );
    }
    for k in 2..=n_max.saturating_sub(1) {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">k={k}</text>"#,
            PAD + CELL * (k - 2) as f64 + CELL / 2.0,
            PAD - 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Worst d-concavity margin against k, one polyline per n.
fn margin_svg(reports: &[VerificationReport]) -> String {
    let (w, h) = (480.0, 320.0);
    let k_max = reports.iter().map(|r| r.params.k).max().unwrap_or(2).max(3) as f64;
    let ms: Vec<f64> = reports.iter().filter_map(|r| r.worst_margin).collect();
    let lo = ms.iter().copied().fold(-1.0f64, f64::min);
    let hi = ms.iter().copied().fold(0.0f64, f64::max);
    let px = |k: usize| PAD + (w - 2.0 * PAD) * (k as f64 - 2.0) / (k_max - 2.0);
    let py = |m: f64| h - PAD - (h - 2.0 * PAD) * (m - lo) / (hi - lo).max(1e-12);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="10">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{PAD}" y="20" font-size="12">worst relative margin of the d-concavity suite (≤ 0 is slack)</text>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{PAD}" y1="{0}" x2="{1}" y2="{0}" stroke="gray" stroke-dasharray="4"/>"#,
        py(0.0),
        w - PAD
    );
    let mut ns: Vec<usize> = reports.iter().map(|r| r.params.n).collect();
    ns.dedup();
    for (i, n) in ns.iter().enumerate() {
        let pts: Vec<String> = reports
            .iter()
            .filter(|r| r.params.n == *n)
            .filter_map(|r| r.worst_margin.map(|m| format!("{:.2},{:.2}", px(r.params.k), py(m))))
            .collect();
        let hue = (i * 67) % 360;
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="hsl({hue},70%,40%)" points="{}"><title>n={n}</title></polyline>"#,
            pts.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}
