//! Monte Carlo ruin-probability estimation: common-random-number sweeps
//! over initial capital and horizon, Wilson confidence intervals, and the
//! log-log slope regression against the decay exponent.
//!
//! All estimators share one path layout — path `k` of a run draws from
//! `RngStream::new(seed, k)` — so a sweep over capitals reuses the same
//! paths (estimates are comonotone by construction), a sweep over horizons
//! sees nested ruin events, and two half-runs over disjoint index ranges
//! merge into exactly the full run.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::model::{ExperimentSpec, GridSpec, ModelError};
use crate::numerics::Z_95;
use crate::simulate::{detect_ruin, simulate_surplus_path, SimError};

/// Errors from estimation.
#[derive(Debug, thiserror::Error)]
pub enum EstimateError {
    /// Too few y-points survive the ruin-count floor to fit a slope.
    #[error(
        "insufficient tail data: {usable} usable point(s) with at least {floor} ruined \
         paths, need at least {needed}"
    )]
    InsufficientTail { usable: usize, needed: usize, floor: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Simulation(#[from] SimError),
}

/// Minimum ruined-path count for a y-point to enter the slope fit; keeps the
/// per-point relative error of ln p̂ below roughly 15%.
pub const SLOPE_COUNT_FLOOR: usize = 50;

/// Minimum number of usable y-points for a slope fit.
pub const SLOPE_MIN_POINTS: usize = 4;

// ---- Ruin estimates ---------------------------------------------------------------

/// One Monte Carlo estimate of P(τ(y) ≤ T) with its Wilson interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuinEstimate {
    pub y: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_paths: usize,
    pub n_ruined: usize,
    pub seed: u64,
    /// The grid the paths were simulated on.
    pub grid: GridSpec,
}

/// 95% Wilson score interval for `successes` out of `n` Bernoulli trials.
/// Chosen over the Wald interval because ruin counts near zero collapse the
/// latter to a point.
pub fn wilson_interval(successes: usize, n: usize) -> (f64, f64) {
    assert!(successes <= n && n > 0, "need 0 <= successes <= n, n > 0");
    let (s, nf) = (successes as f64, n as f64);
    let p = s / nf;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = Z_95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    // Pin the boundary cases (center − half is 0 or 1 only up to rounding)
    // and keep the bracket invariant ci_low ≤ p̂ ≤ ci_high exact.
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0).min(p) };
    let hi = if successes == n { 1.0 } else { (center + half).min(1.0).max(p) };
    (lo, hi)
}

fn estimate_from_count(
    y: f64,
    t: f64,
    n_ruined: usize,
    n_paths: usize,
    seed: u64,
    grid: GridSpec,
) -> RuinEstimate {
    let (ci_low, ci_high) = wilson_interval(n_ruined, n_paths);
    RuinEstimate {
        y,
        t,
        p_hat: n_ruined as f64 / n_paths as f64,
        ci_low,
        ci_high,
        n_paths,
        n_ruined,
        seed,
        grid,
    }
}

/// Simulate the paths with indices in `paths` and return each path's largest
/// shortfall sup_{t_i ≤ T} (−Z_{t_i}), in index order.
///
/// This is the fan-out unit: disjoint ranges can run on different workers
/// (or machines) and concatenate into exactly the single-run result, because
/// path `k` depends only on `(seed, k)`.
pub fn run_paths(spec: &ExperimentSpec, paths: Range<u64>) -> Result<Vec<f64>, EstimateError> {
    let simulate = |k: u64| -> Result<f64, EstimateError> {
        Ok(simulate_surplus_path(spec, k)?.max_shortfall())
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        paths.into_par_iter().map(simulate).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        paths.map(simulate).collect()
    }
}

/// Estimate P(τ(y) ≤ T) for every capital in `spec.capitals` over one common
/// set of `spec.mc.n_paths` paths. Sharing paths across capitals makes the
/// estimates comonotone: p̂(y) is exactly nonincreasing in y.
pub fn mc_ruin_probability(spec: &ExperimentSpec) -> Result<Vec<RuinEstimate>, EstimateError> {
    spec.ensure_valid()?;
    let shortfalls = run_paths(spec, 0..spec.mc.n_paths as u64)?;
    Ok(spec
        .capitals
        .iter()
        .map(|&y| {
            let n_ruined = shortfalls.iter().filter(|&&m| m > y).count();
            estimate_from_count(y, spec.grid.t, n_ruined, spec.mc.n_paths, spec.mc.seed, spec.grid)
        })
        .collect())
}

/// Estimate P(τ(y) ≤ T) for each horizon in `t_list` (strictly increasing)
/// at one capital `y`, over shared paths simulated once out to the largest
/// horizon: the ruin events are nested, so p̂ is exactly nondecreasing in T.
///
/// The grid keeps the step size of `spec.grid` and extends to max(t_list).
pub fn certain_ruin_probe(
    spec: &ExperimentSpec,
    y: f64,
    t_list: &[f64],
) -> Result<Vec<RuinEstimate>, EstimateError> {
    spec.ensure_valid()?;
    debug_assert!(
        t_list.windows(2).all(|w| w[0] < w[1]) && t_list.first().is_some_and(|&t| t > 0.0),
        "t_list must be strictly increasing and positive"
    );
    let t_max = *t_list.last().expect("t_list must be nonempty");
    let step = spec.grid.t / spec.grid.n_steps as f64;
    let grid = GridSpec {
        t: t_max,
        n_steps: (t_max / step).ceil() as usize,
        jump_adapted: spec.grid.jump_adapted,
    };
    let mut probe_spec = spec.clone();
    probe_spec.grid = grid;

    let simulate = |k: u64| -> Result<Option<f64>, EstimateError> {
        let path = simulate_surplus_path(&probe_spec, k)?;
        Ok(detect_ruin(&path, y))
    };
    let ruin_times: Vec<Option<f64>> = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..spec.mc.n_paths as u64)
                .into_par_iter()
                .map(simulate)
                .collect::<Result<_, _>>()?
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..spec.mc.n_paths as u64).map(simulate).collect::<Result<Vec<_>, _>>()?
        }
    };

    Ok(t_list
        .iter()
        .map(|&t| {
            let n_ruined = ruin_times
                .iter()
                .filter(|tau| tau.is_some_and(|tau| tau <= t))
                .count();
            estimate_from_count(y, t, n_ruined, spec.mc.n_paths, spec.mc.seed, grid)
        })
        .collect())
}

// ---- Log-log slope regression ---------------------------------------------------------

/// Least-squares fit of ln p̂ against ln y, the empirical counterpart of the
/// tail-decay exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    /// Capitals that entered the fit (those with enough ruined paths).
    pub ys: Vec<f64>,
    pub log_ys: Vec<f64>,
    pub log_ps: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_err: f64,
    /// Reference decay exponent β; the fit is compared against −β.
    pub beta_ref: Option<f64>,
    /// slope − (−β), when a reference is given.
    pub gap_to_reference: Option<f64>,
    pub n_used: usize,
}

/// Ordinary least squares of ln p̂ on ln y over the estimates whose ruin
/// count meets [`SLOPE_COUNT_FLOOR`] (per-point relative-error control).
/// Needs at least [`SLOPE_MIN_POINTS`] usable points.
pub fn slope_fit(
    estimates: &[RuinEstimate],
    beta_ref: Option<f64>,
) -> Result<SlopeFit, EstimateError> {
    let usable: Vec<&RuinEstimate> = estimates
        .iter()
        .filter(|e| e.n_ruined >= SLOPE_COUNT_FLOOR)
        .collect();
    if usable.len() < SLOPE_MIN_POINTS {
        return Err(EstimateError::InsufficientTail {
            usable: usable.len(),
            needed: SLOPE_MIN_POINTS,
            floor: SLOPE_COUNT_FLOOR,
        });
    }
    let n = usable.len() as f64;
    let xs: Vec<f64> = usable.iter().map(|e| e.y.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|e| e.p_hat.ln()).collect();
    let x_bar = xs.iter().sum::<f64>() / n;
    let y_bar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_bar).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_bar) * (y - y_bar)).sum();
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    // Residual variance with n − 2 degrees of freedom; exactly collinear
    // data gives a zero standard error.
    let dof = (n - 2.0).max(1.0);
    let slope_std_err = (rss / dof / sxx).sqrt();

    Ok(SlopeFit {
        ys: usable.iter().map(|e| e.y).collect(),
        log_ys: xs,
        log_ps: ys,
        slope,
        intercept,
        slope_std_err,
        beta_ref,
        gap_to_reference: beta_ref.map(|b| slope + b),
        n_used: usable.len(),
    })
}

// ---- Tests -----------------------------------------------------------------------------
