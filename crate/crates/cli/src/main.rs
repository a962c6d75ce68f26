//! `ruinlab` — ruin probabilities for an insurer investing in a risky asset.
//!
//! One subcommand per question (simulate / bound / beta / slope / certain /
//! validate), one JSON config per experiment, every output reproducible from
//! the seed. Results land under `--out` as a content-addressed run
//! directory; the console gets a short human summary.
//!
//! Exit codes: 0 success, 2 configuration/validation failure, 1 runtime
//! error. Diagnostics go to standard error and name the failing key.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ruinlab_core::analytics::{
    beta_report, beta_t_classifier, certain_ruin, BetaInfinity, BetaT, Certainty, Provenance,
    RuinVerdict,
};
use ruinlab_core::bounds::{
    bound_constants, finite_time_report, moments, BoundReport, BoundsError, MomentMode,
};
use ruinlab_core::estimate::{certain_ruin_probe, mc_ruin_probability, slope_fit, RuinEstimate};
use ruinlab_core::io::{write_path_csv, write_run, BoundRow, RunManifest};
use ruinlab_core::model::ExperimentSpec;
use ruinlab_core::simulate::simulate_surplus_path;

#[derive(Parser)]
#[command(
    name = "ruinlab",
    version,
    about = "Ruin probabilities under risky investment: Monte Carlo, bounds, exponents",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration file (JSON).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Directory for run artifacts (runs/<id>/…).
    #[arg(long, global = true, value_name = "DIR", default_value = "./runs")]
    out: PathBuf,

    /// Override the Monte Carlo seed from the config (mc.seed, default 42).
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Worker threads for path simulation (default: all available cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Dotted-path config override, e.g. --set mc.n_paths=100000 (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Repeat the sweep at doubled time resolution and report how every
    /// estimate moves (a probe of the discrete-monitoring bias).
    #[arg(long, global = true)]
    bias_probe: bool,

    /// Dump the first N simulated paths as runs/<id>/paths/<k>.csv.
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    dump_paths: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo ruin probabilities over the configured capitals.
    Simulate,
    /// Explicit-constant upper bounds next to the Monte Carlo estimates.
    Bound,
    /// Exponent report: the finite-horizon classifier and the positive root.
    Beta,
    /// Log-log tail-slope fit of the ruin probabilities over the capitals.
    Slope,
    /// Certain-ruin verdict; runs the probe sweep when the config has one.
    Certain,
    /// Check a configuration against every structural invariant.
    Validate,
}

enum CliError {
    /// Bad configuration or request: exit 2.
    Validation(String),
    /// Failure while computing or writing: exit 1.
    Runtime(String),
}

fn validation(msg: impl ToString) -> CliError {
    CliError::Validation(msg.to_string())
}

fn runtime(msg: impl ToString) -> CliError {
    CliError::Runtime(msg.to_string())
}

/// Bound assembly failures that indicate a misconfigured request (α outside
/// its admissible range) exit 2; anything else is a runtime failure.
fn bounds_err(e: BoundsError) -> CliError {
    match e {
        BoundsError::AlphaOutOfRange { .. } => validation(e),
        other => runtime(other),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {}", msg.trim_end());
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {}", msg.trim_end());
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| runtime(format!("--threads {threads}: {e}")))?;
    }
    let (spec, overrides) = load_config(&cli.common)?;
    match cli.command {
        Command::Validate => cmd_validate(&spec),
        Command::Beta => cmd_beta(&spec, overrides, &cli.common),
        Command::Simulate => cmd_simulate(&spec, overrides, &cli.common),
        Command::Bound => cmd_bound(&spec, overrides, &cli.common),
        Command::Slope => cmd_slope(&spec, overrides, &cli.common),
        Command::Certain => cmd_certain(&spec, overrides, &cli.common),
    }
}

// ── Config loading ───────────────────────────────────────────────────────────

/// Read the config file, apply `--set` overrides and the `--seed` shortcut,
/// and deserialize. Structural validation is left to each command so that
/// `validate` can report every diagnostic instead of the first.
fn load_config(common: &Common) -> Result<(ExperimentSpec, Vec<String>), CliError> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| validation("--config <FILE> is required"))?;
    let raw = fs::read_to_string(path)
        .map_err(|e| runtime(format!("cannot read config {}: {e}", path.display())))?;
    let mut value: serde_json::Value = serde_json::from_str(&raw)
        .map_err(|e| validation(format!("config {} is not valid JSON: {e}", path.display())))?;

    let mut overrides = Vec::new();
    for kv in &common.set {
        let (key, val) = kv
            .split_once('=')
            .ok_or_else(|| validation(format!("--set {kv}: expected KEY=VALUE")))?;
        apply_override(&mut value, key, val)?;
        overrides.push(kv.clone());
    }
    if let Some(seed) = common.seed {
        apply_override(&mut value, "mc.seed", &seed.to_string())?;
        overrides.push(format!("mc.seed={seed}"));
    }

    let spec: ExperimentSpec = serde_json::from_value(value)
        .map_err(|e| validation(format!("config {}: {e}", path.display())))?;
    Ok((spec, overrides))
}

/// Set `root[key] = value` along a dotted path, creating intermediate
/// objects as needed. The value is parsed as JSON when possible and kept as
/// a string otherwise (so `--set returns.model=black_scholes` works without
/// quoting gymnastics).
fn apply_override(root: &mut serde_json::Value, key: &str, raw: &str) -> Result<(), CliError> {
    let parsed: serde_json::Value =
        serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let mut parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(validation(format!("--set {key}: empty path segment")));
    }
    let last = parts.pop().expect("split always yields one segment");
    let mut cursor = root;
    for (depth, part) in parts.iter().enumerate() {
        let object = cursor.as_object_mut().ok_or_else(|| {
            validation(format!("--set {key}: {} is not an object", parts[..=depth].join(".")))
        })?;
        cursor = object
            .entry(part.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    let object = cursor
        .as_object_mut()
        .ok_or_else(|| validation(format!("--set {key}: parent of {last} is not an object")))?;
    object.insert(last.to_string(), parsed);
    Ok(())
}

fn ensure_valid(spec: &ExperimentSpec) -> Result<(), CliError> {
    spec.ensure_valid().map_err(|e| validation(e))
}

// ── Output plumbing ─────────────────────────────────────────────────────────

fn manifest_for(spec: &ExperimentSpec, overrides: Vec<String>) -> RunManifest {
    let mut m = RunManifest::new(spec.clone());
    m.overrides = overrides;
    m
}

fn persist(manifest: &RunManifest, common: &Common) -> Result<PathBuf, CliError> {
    let files = write_run(manifest, &common.out).map_err(runtime)?;
    let dir = common.out.join(&manifest.run_id);
    println!("run {}: {} file(s) under {}", manifest.run_id, files.len(), dir.display());
    Ok(dir)
}

fn dump_requested_paths(
    spec: &ExperimentSpec,
    run_dir: &Path,
    count: u64,
) -> Result<(), CliError> {
    let count = count.min(spec.mc.n_paths as u64);
    for k in 0..count {
        let path = simulate_surplus_path(spec, k).map_err(runtime)?;
        write_path_csv(run_dir, k, &path).map_err(runtime)?;
    }
    if count > 0 {
        println!("dumped {count} path file(s) under {}", run_dir.join("paths").display());
    }
    Ok(())
}

fn print_estimates(estimates: &[RuinEstimate]) {
    for e in estimates {
        println!(
            "y = {:<10} T = {:<8} p_hat = {:<12.6e} 95% CI [{:.6e}, {:.6e}]  ruined {}/{}",
            e.y, e.t, e.p_hat, e.ci_low, e.ci_high, e.n_ruined, e.n_paths
        );
    }
}

/// Rerun a sweep at doubled n_steps and print how each estimate moves; a
/// large shift means the monitoring grid, not the model, is driving the
/// number.
fn print_bias_probe(spec: &ExperimentSpec, base: &[RuinEstimate]) -> Result<(), CliError> {
    let mut refined = spec.clone();
    refined.grid.n_steps *= 2;
    let fine = mc_ruin_probability(&refined).map_err(runtime)?;
    println!(
        "bias probe: n_steps {} -> {} (same seed)",
        spec.grid.n_steps, refined.grid.n_steps
    );
    for (b, f) in base.iter().zip(&fine) {
        println!(
            "y = {:<10} p_hat {:<12.6e} -> {:<12.6e} (delta {:+.3e})",
            b.y,
            b.p_hat,
            f.p_hat,
            f.p_hat - b.p_hat
        );
    }
    Ok(())
}

// ── Commands ────────────────────────────────────────────────────────────────

fn cmd_validate(spec: &ExperimentSpec) -> Result<(), CliError> {
    let report = spec.validate();
    if !report.is_ok() {
        return Err(validation(format!("invalid experiment specification:\n{report}")));
    }
    // Structural invariants hold; report what the analytic layer can offer.
    match ruinlab_core::analytics::laplace_exponent(&spec.returns) {
        Ok(psi) => {
            let domain = if psi.alpha_max.is_finite() {
                format!("alpha < {:.6}", psi.alpha_max)
            } else {
                "all alpha >= 0".to_string()
            };
            let how = match psi.provenance {
                Provenance::ClosedForm => "closed form".to_string(),
                Provenance::Quadrature { abs_tol } => {
                    format!("quadrature, abs tol {abs_tol:.1e}")
                }
            };
            println!("laplace exponent: available ({how}, {domain})");
            for &alpha in &spec.alphas {
                match psi.eval(alpha) {
                    Ok(v) => println!("  psi({alpha}) = {v:.6}"),
                    Err(e) => println!("  psi({alpha}) unavailable: {e}"),
                }
            }
        }
        Err(e) => println!("laplace exponent: unavailable ({e})"),
    }
    match beta_t_classifier(&spec.returns) {
        BetaT::Infinite { .. } => println!("beta_T: infinite"),
        BetaT::Finite { value, .. } => println!("beta_T = {value}"),
        BetaT::Unknown { reason } => println!("beta_T: unknown ({reason})"),
    }
    println!("configuration valid");
    Ok(())
}

fn cmd_beta(
    spec: &ExperimentSpec,
    overrides: Vec<String>,
    common: &Common,
) -> Result<(), CliError> {
    ensure_valid(spec)?;
    let report = beta_report(&spec.returns);
    match &report.beta_t {
        BetaT::Infinite { criterion } => println!("beta_T: infinite ({criterion})"),
        BetaT::Finite { value, certainty, criterion } => {
            let qualifier = match certainty {
                Certainty::Exact => "",
                Certainty::LowerBound => " (lower bound)",
            };
            println!("beta_T = {value}{qualifier} ({criterion})");
        }
        BetaT::Unknown { reason } => println!("beta_T: unknown ({reason})"),
    }
    match &report.beta_inf {
        BetaInfinity::Root { value, residual, iterations, method, .. } => println!(
            "beta_inf = {value:.6} ({method}, {iterations} iterations, residual {residual:.1e})"
        ),
        BetaInfinity::NoPositiveRoot { reason } => {
            println!("beta_inf: no positive root ({reason})");
        }
        BetaInfinity::Unknown { reason } => println!("beta_inf: unknown ({reason})"),
    }
    let mut manifest = manifest_for(spec, overrides);
    manifest.beta = Some(report);
    persist(&manifest, common)?;
    Ok(())
}

fn cmd_simulate(
    spec: &ExperimentSpec,
    overrides: Vec<String>,
    common: &Common,
) -> Result<(), CliError> {
    ensure_valid(spec)?;
    let estimates = mc_ruin_probability(spec).map_err(runtime)?;
    print_estimates(&estimates);
    if common.bias_probe {
        print_bias_probe(spec, &estimates)?;
    }
    let mut manifest = manifest_for(spec, overrides);
    manifest.estimates = estimates;
    let run_dir = persist(&manifest, common)?;
    dump_requested_paths(spec, &run_dir, common.dump_paths)
}

fn cmd_bound(
    spec: &ExperimentSpec,
    overrides: Vec<String>,
    common: &Common,
) -> Result<(), CliError> {
    ensure_valid(spec)?;
    let estimates = mc_ruin_probability(spec).map_err(runtime)?;
    let beta_t = beta_t_classifier(&spec.returns);
    let mut reports: Vec<BoundReport> = Vec::new();
    let mut rows: Vec<BoundRow> = Vec::new();
    for &alpha in &spec.alphas {
        let constants = bound_constants(&spec.business, alpha, &spec.novikov).map_err(bounds_err)?;
        let mode = MomentMode::MonteCarlo { n_paths: spec.mc.n_paths, seed: spec.mc.seed };
        let moms = moments(&spec.returns, &spec.grid, alpha, &mode, spec.cutoff_eps)
            .map_err(bounds_err)?;
        let report = finite_time_report(&constants, &moms, &beta_t).map_err(bounds_err)?;
        for note in &report.notes {
            eprintln!("warning: alpha = {alpha}: {note}");
        }
        for est in &estimates {
            let bound = report.bound(est.y);
            println!(
                "alpha = {:<6} y = {:<10} bound = {:<12.6e} mc p_hat = {:<12.6e} ci_high = {:.6e}",
                alpha, est.y, bound, est.p_hat, est.ci_high
            );
            rows.push(BoundRow {
                y: est.y,
                alpha,
                bound,
                mc_estimate: Some(est.p_hat),
                mc_ci_hi: Some(est.ci_high),
            });
        }
        reports.push(report);
    }
    let mut manifest = manifest_for(spec, overrides);
    manifest.bound_reports = reports;
    manifest.bound_rows = rows;
    manifest.estimates = estimates;
    let run_dir = persist(&manifest, common)?;
    dump_requested_paths(spec, &run_dir, common.dump_paths)
}

fn cmd_slope(
    spec: &ExperimentSpec,
    overrides: Vec<String>,
    common: &Common,
) -> Result<(), CliError> {
    ensure_valid(spec)?;
    let estimates = mc_ruin_probability(spec).map_err(runtime)?;
    print_estimates(&estimates);
    let beta_ref = match beta_t_classifier(&spec.returns) {
        BetaT::Finite { value, .. } => Some(value),
        _ => None,
    };
    let fit = slope_fit(&estimates, beta_ref).map_err(runtime)?;
    println!(
        "slope = {:.4} +/- {:.4} over {} capitals (intercept {:.4})",
        fit.slope, fit.slope_std_err, fit.n_used, fit.intercept
    );
    if let (Some(beta), Some(gap)) = (fit.beta_ref, fit.gap_to_reference) {
        println!("reference decay beta_T = {beta}: slope + beta = {gap:+.4}");
    }
    if common.bias_probe {
        print_bias_probe(spec, &estimates)?;
    }
    let mut manifest = manifest_for(spec, overrides);
    manifest.slope = Some(fit);
    manifest.estimates = estimates;
    let run_dir = persist(&manifest, common)?;
    dump_requested_paths(spec, &run_dir, common.dump_paths)
}

fn cmd_certain(
    spec: &ExperimentSpec,
    overrides: Vec<String>,
    common: &Common,
) -> Result<(), CliError> {
    ensure_valid(spec)?;
    let report = certain_ruin(spec).map_err(runtime)?;
    let verdict = match report.verdict {
        RuinVerdict::CertainRuin => "certain_ruin",
        RuinVerdict::ConditionNotMet => "condition_not_met",
        RuinVerdict::Inapplicable => "inapplicable",
    };
    println!("verdict: {verdict}");
    if let Some(d) = report.drift_limit {
        println!("D = {d:.4} (almost-sure limit of the log growth rate over time)");
    }
    for c in &report.conditions {
        let mark = if c.satisfied { "ok " } else { "not" };
        match c.value {
            Some(v) => println!("  [{mark}] {}: {} (value {v:.6})", c.name, c.detail),
            None => println!("  [{mark}] {}: {}", c.name, c.detail),
        }
    }
    let probe_estimates = if let Some(probe) = &spec.probe {
        let probes = certain_ruin_probe(spec, probe.y, &probe.t_list).map_err(runtime)?;
        println!("probe at y = {}:", probe.y);
        print_estimates(&probes);
        if common.bias_probe {
            let mut refined = spec.clone();
            refined.grid.n_steps *= 2;
            let fine = certain_ruin_probe(&refined, probe.y, &probe.t_list).map_err(runtime)?;
            println!(
                "bias probe: n_steps {} -> {} (same seed)",
                spec.grid.n_steps, refined.grid.n_steps
            );
            for (b, f) in probes.iter().zip(&fine) {
                println!(
                    "T = {:<8} p_hat {:<12.6e} -> {:<12.6e} (delta {:+.3e})",
                    b.t, b.p_hat, f.p_hat, f.p_hat - b.p_hat
                );
            }
        }
        probes
    } else {
        Vec::new()
    };
    let mut manifest = manifest_for(spec, overrides);
    manifest.certain_ruin = Some(report);
    manifest.estimates = probe_estimates;
    persist(&manifest, common)?;
    Ok(())
}
