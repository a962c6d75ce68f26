//! Model specifications: the insurance business process, the four return
//! models, the simulation grid, and the experiment configuration that ties
//! them together. Everything here is plain serde-friendly data plus
//! validation; dynamics live in [`crate::simulate`], analytic objects in
//! [`crate::analytics`].
//!
//! Drift conventions (they differ by variant and are easy to mix up):
//!
//! * `BusinessSpec::drift` and `LevyJumpDiffusion::a` and
//!   `AdditiveIntegral::a` are the drift of the semimartingale decomposition
//!   with jumps compensated on |x| ≤ 1. The pathwise (uncompensated) drift is
//!   `a − ∫_{|x|≤1} x ν(dx)`.
//! * `BlackScholes::a` is the instantaneous return rate: dR = a dt + σ dW.
//! * `HatJumpDiffusion::a` is the literal drift of the log-return process:
//!   compound-Poisson jumps ride on top uncompensated, while tempered tails
//!   (infinite activity) are compensated on |x| ≤ 1 as usual.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jumps::JumpFamily;
use crate::numerics::{NumericsError, PiecewiseLinear};

// ── Business process ──────────────────────────────────────────────────────

/// The insurance business: X_t = drift·t + sigma·W_t + jumps (premiums minus
/// claims). Jumps are compensated on |x| ≤ 1, see the module docs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BusinessSpec {
    pub drift: f64,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default = "JumpFamily::none")]
    pub jumps: JumpFamily,
}

impl BusinessSpec {
    /// Drift of the uncompensated pathwise representation,
    /// drift − ∫_{|x|≤1} x ν(dx).
    pub fn pathwise_drift(&self) -> Result<f64, NumericsError> {
        Ok(self.drift - self.jumps.nu_mean_small()?)
    }

    /// δ_X = drift + ∫_{|x|>1} x ν(dx), the effective linear growth rate of
    /// the business process (equal to E X_1 when that mean exists).
    pub fn delta_x(&self) -> Result<f64, NumericsError> {
        Ok(self.drift + self.jumps.nu_mean_big()?)
    }

    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !self.drift.is_finite() {
            v.push(format!("business drift must be finite, got {}", self.drift));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            v.push(format!("business sigma must be finite and ≥ 0, got {}", self.sigma));
        }
        v.extend(self.jumps.violations().into_iter().map(|m| format!("business jumps: {m}")));
        if matches!(self.jumps, JumpFamily::TemperedStableTails { .. }) {
            if !self.jumps.finite_activity() {
                v.push(
                    "business jumps: infinite-activity business jumps unsupported (tempered \
                     tails need both alpha_neg and alpha_pos < 0 so exact jump-epoch \
                     simulation applies)"
                        .to_string(),
                );
            } else {
                v.extend(tempered_integrability_violations(&self.jumps, "business jumps"));
            }
        }
        v
    }
}

/// Numerical check that a tempered-tails measure integrates min(x², 1):
/// evaluates ∫_{|x|≤1}x²ν and ∫_{|x|>1}ν by quadrature and reports failures.
fn tempered_integrability_violations(jumps: &JumpFamily, ctx: &str) -> Vec<String> {
    let mut v = Vec::new();
    if let Err(e) = jumps.nu_sq_small() {
        v.push(format!("{ctx}: tempered tails fail the small-jump x² integrability check: {e}"));
    }
    if let Err(e) = jumps.nu_abs_pow_big(0.0) {
        v.push(format!("{ctx}: tempered tails fail the tail-mass integrability check: {e}"));
    }
    v
}

// ── Return models ─────────────────────────────────────────────────────────

/// Knot list for the additive model's integrand g, deserialized as
/// `[[s, g(s)], …]` and converted to a [`PiecewiseLinear`] on demand.
pub type GKnots = Vec<(f64, f64)>;

/// Investment-return model. The surplus solves
/// dY = dX + Y_{−} dR with Y_0 = y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ReturnSpec {
    /// dR = a dt + sigma dW; log-price R̂ = (a − σ²/2)t + σW.
    BlackScholes { a: f64, sigma: f64 },
    /// dR = a dt + sigma dW + jump part, jumps in (−1, ∞) so the price stays
    /// positive. Compound Poisson only.
    LevyJumpDiffusion { a: f64, sigma: f64, jumps: JumpFamily },
    /// The log-return process R̂ is modelled directly as a jump diffusion:
    /// R̂ = a·t + σW + jumps. The price multiplier is e^{R̂}, so jumps of any
    /// size are admissible, including tempered-stable tails.
    HatJumpDiffusion { a: f64, sigma: f64, jumps: JumpFamily },
    /// R_t = ∫₀ᵗ g(s) dL_s for a deterministic piecewise-linear g and a
    /// Lévy driver L = a·t + σW + jumps (compensated on |x| ≤ 1).
    AdditiveIntegral { g: GKnots, a: f64, sigma: f64, jumps: JumpFamily },
}

impl ReturnSpec {
    /// Jump family of the model (`None` for Black–Scholes).
    pub fn jumps(&self) -> JumpFamily {
        match self {
            ReturnSpec::BlackScholes { .. } => JumpFamily::None,
            ReturnSpec::LevyJumpDiffusion { jumps, .. }
            | ReturnSpec::HatJumpDiffusion { jumps, .. }
            | ReturnSpec::AdditiveIntegral { jumps, .. } => *jumps,
        }
    }

    /// The additive integrand as a prepared interpolant.
    pub fn g_curve(&self) -> Option<Result<PiecewiseLinear, NumericsError>> {
        match self {
            ReturnSpec::AdditiveIntegral { g, .. } => Some(PiecewiseLinear::new(g.clone())),
            _ => None,
        }
    }

    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        match self {
            ReturnSpec::BlackScholes { a, sigma } => {
                if !a.is_finite() {
                    v.push(format!("returns: a must be finite, got {a}"));
                }
                if !(*sigma > 0.0 && sigma.is_finite()) {
                    v.push(format!("returns: Black–Scholes sigma must be finite and > 0, got {sigma}"));
                }
            }
            ReturnSpec::LevyJumpDiffusion { a, sigma, jumps } => {
                if !a.is_finite() {
                    v.push(format!("returns: a must be finite, got {a}"));
                }
                if !(*sigma >= 0.0 && sigma.is_finite()) {
                    v.push(format!("returns: sigma must be finite and ≥ 0, got {sigma}"));
                }
                v.extend(jumps.violations().into_iter().map(|m| format!("returns jumps: {m}")));
                if matches!(jumps, JumpFamily::TemperedStableTails { .. }) {
                    v.push(
                        "returns: tempered-stable tails must be placed on the log-return \
                         model (hat_jump_diffusion); raw return jumps are bounded below by −1"
                            .to_string(),
                    );
                } else if jumps.support_min() <= -1.0 {
                    v.push(format!(
                        "returns: jump support must lie in (−1, ∞) so the price stays \
                         positive; support reaches down to {}",
                        jumps.support_min()
                    ));
                }
            }
            ReturnSpec::HatJumpDiffusion { a, sigma, jumps } => {
                if !a.is_finite() {
                    v.push(format!("returns: a must be finite, got {a}"));
                }
                if !(*sigma >= 0.0 && sigma.is_finite()) {
                    v.push(format!("returns: sigma must be finite and ≥ 0, got {sigma}"));
                }
                v.extend(jumps.violations().into_iter().map(|m| format!("returns jumps: {m}")));
                if matches!(jumps, JumpFamily::TemperedStableTails { .. })
                    && jumps.violations().is_empty()
                {
                    v.extend(tempered_integrability_violations(jumps, "returns jumps"));
                }
            }
            ReturnSpec::AdditiveIntegral { g, a, sigma, jumps } => {
                if !a.is_finite() {
                    v.push(format!("returns: a must be finite, got {a}"));
                }
                if !(*sigma >= 0.0 && sigma.is_finite()) {
                    v.push(format!("returns: sigma must be finite and ≥ 0, got {sigma}"));
                }
                v.extend(jumps.violations().into_iter().map(|m| format!("returns jumps: {m}")));
                if matches!(jumps, JumpFamily::TemperedStableTails { .. }) {
                    v.push(
                        "returns: tempered-stable tails on the additive driver are \
                         unsupported; use compound-Poisson jumps"
                            .to_string(),
                    );
                }
                if g.len() < 2 {
                    v.push(format!(
                        "returns: integrand g needs at least 2 knots, got {}",
                        g.len()
                    ));
                }
                match PiecewiseLinear::new(g.clone()) {
                    Err(e) => v.push(format!("returns: invalid integrand g: {e}")),
                    Ok(curve) => {
                        if let Some(&(s, val)) =
                            g.iter().find(|&&(_, val)| !(val > 0.0))
                        {
                            v.push(format!(
                                "returns: integrand g must be strictly positive, g({s}) = {val}"
                            ));
                        }
                        if !jumps.is_none() {
                            let (g_min, g_max) = curve.range_on(curve.first_s(), curve.last_s());
                            let (s_min, s_max) = (jumps.support_min(), jumps.support_max());
                            // A return jump is g(s)·ξ; every combination of the
                            // g range and the jump support must stay above −1.
                            // Zero factors are mapped to zero explicitly so a
                            // 0·∞ pairing cannot poison the comparison.
                            let prod = |a: f64, b: f64| if a == 0.0 || b == 0.0 { 0.0 } else { a * b };
                            let worst = prod(g_min, s_max)
                                .min(prod(g_min, s_min))
                                .min(prod(g_max, s_min))
                                .min(prod(g_max, s_max));
                            if !(worst > -1.0) {
                                v.push(format!(
                                    "returns: additive jumps g(s)·ξ can reach {worst} ≤ −1 \
                                     (g range [{g_min}, {g_max}], jump support \
                                     [{s_min}, {s_max}]); the price multiplier would hit zero"
                                ));
                            }
                        }
                    }
                }
            }
        }
        v
    }
}

impl JumpFamily {
    /// serde default helper.
    pub fn none() -> Self {
        JumpFamily::None
    }
}

// ── Grid, Monte Carlo, bound constants ────────────────────────────────────

/// Time grid for path simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Horizon T.
    #[serde(rename = "T")]
    pub t: f64,
    /// Number of uniform steps on [0, T].
    pub n_steps: usize,
    /// Refine the grid with the exact epochs of the return process's
    /// compound-Poisson jumps (recommended; keeps ΔR > −1 exact).
    #[serde(default = "default_true")]
    pub jump_adapted: bool,
}

fn default_true() -> bool {
    true
}

/// Monte Carlo controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSpec {
    pub n_paths: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    42
}

/// Multiplicative constants from the Novikov maximal inequalities used by the
/// finite-horizon bound. Sharp values are not available in closed form; the
/// default of 8 per regime is a documented placeholder and every bound report
/// carries a note saying so.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NovikovConstants {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl Default for NovikovConstants {
    fn default() -> Self {
        Self { k1: 8.0, k2: 8.0, k3: 8.0 }
    }
}

/// Parameters for the certain-ruin probe (`certain --probe`): one initial
/// capital and a list of horizons at which the ruin frequency is estimated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub y: f64,
    pub t_list: Vec<f64>,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        Self { y: 1.0, t_list: vec![10.0, 50.0, 200.0] }
    }
}

// ── Experiment specification ──────────────────────────────────────────────

/// Full experiment configuration: the model pair, the grid, Monte Carlo
/// controls, and the evaluation points for estimates and bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub business: BusinessSpec,
    pub returns: ReturnSpec,
    pub grid: GridSpec,
    pub mc: McSpec,
    /// Initial capitals y at which ruin probabilities are estimated.
    #[serde(default = "default_capitals")]
    pub capitals: Vec<f64>,
    /// Moment orders α for exponential-functional moments and bounds.
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub novikov: NovikovConstants,
    #[serde(default)]
    pub probe: Option<ProbeSpec>,
    /// Small-jump cutoff ε for simulating infinite-activity tempered tails:
    /// jumps below ε are dropped and their compensator folded into the drift.
    #[serde(default = "default_cutoff")]
    pub cutoff_eps: f64,
}

fn default_capitals() -> Vec<f64> {
    vec![1.0]
}

fn default_alphas() -> Vec<f64> {
    vec![2.0]
}

fn default_cutoff() -> f64 {
    1e-3
}

/// Outcome of validating an [`ExperimentSpec`]: empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub diagnostics: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_ok() {
            write!(f, "ok")
        } else {
            for d in &self.diagnostics {
                writeln!(f, "- {d}")?;
            }
            Ok(())
        }
    }
}

/// Error raised by compute entry points when handed an invalid spec.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid experiment specification:\n{0}")]
    Invalid(ValidationReport),
}

impl ExperimentSpec {
    /// Check every structural invariant, reporting one diagnostic per
    /// violation (an empty report means the spec is usable).
    pub fn validate(&self) -> ValidationReport {
        let mut d = Vec::new();
        d.extend(self.business.violations());
        d.extend(self.returns.violations());
        if !(self.grid.t > 0.0 && self.grid.t.is_finite()) {
            d.push(format!("grid: T must be finite and > 0, got {}", self.grid.t));
        }
        if self.grid.n_steps == 0 {
            d.push("grid: n_steps must be ≥ 1".to_string());
        }
        if self.mc.n_paths == 0 {
            d.push("mc: n_paths must be ≥ 1".to_string());
        }
        if self.capitals.is_empty() {
            d.push("capitals: at least one initial capital is required".to_string());
        }
        for &y in &self.capitals {
            if !(y > 0.0 && y.is_finite()) {
                d.push(format!("capitals: initial capital must be finite and > 0, got {y}"));
            }
        }
        if self.capitals.windows(2).any(|w| !(w[1] > w[0])) {
            d.push("capitals: initial capitals must be strictly ascending".to_string());
        }
        if let ReturnSpec::AdditiveIntegral { g, .. } = &self.returns {
            // Interpolation only — the table must cover the simulation horizon.
            if let (Some(first), Some(last)) = (g.first(), g.last()) {
                if first.0 > 0.0 || last.0 < self.grid.t {
                    d.push(format!(
                        "returns: integrand g knots [{}, {}] must cover [0, {}]; \
                         extrapolation is not performed",
                        first.0, last.0, self.grid.t
                    ));
                }
            }
        }
        for &a in &self.alphas {
            if !(a > 0.0 && a.is_finite()) {
                d.push(format!("alphas: moment order must be finite and > 0, got {a}"));
            }
        }
        for (name, k) in [("K1", self.novikov.k1), ("K2", self.novikov.k2), ("K3", self.novikov.k3)]
        {
            if !(k > 0.0 && k.is_finite()) {
                d.push(format!("novikov: {name} must be finite and > 0, got {k}"));
            }
        }
        if let Some(p) = &self.probe {
            if !(p.y > 0.0 && p.y.is_finite()) {
                d.push(format!("probe: y must be finite and > 0, got {}", p.y));
            }
            if p.t_list.is_empty() {
                d.push("probe: t_list must not be empty".to_string());
            }
            for &t in &p.t_list {
                if !(t > 0.0 && t.is_finite()) {
                    d.push(format!("probe: horizon must be finite and > 0, got {t}"));
                }
            }
        }
        if !(self.cutoff_eps > 0.0 && self.cutoff_eps < 1.0) {
            d.push(format!("cutoff_eps must lie in (0, 1), got {}", self.cutoff_eps));
        }
        ValidationReport { diagnostics: d }
    }

    /// Validate and convert failures into a [`ModelError`].
    pub fn ensure_valid(&self) -> Result<(), ModelError> {
        let report = self.validate();
        if report.is_ok() {
            Ok(())
        } else {
            Err(ModelError::Invalid(report))
        }
    }
}

// ── Tests ──────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jumps::JumpSizeDist;
    use approx::assert_relative_eq;

    fn base_spec() -> ExperimentSpec {
        ExperimentSpec {
            business: BusinessSpec {
                drift: 1.0,
                sigma: 0.5,
                jumps: JumpFamily::CompoundPoisson {
                    rate: 1.0,
                    sizes: JumpSizeDist::Exponential { rate: 1.0 },
                },
            },
            returns: ReturnSpec::BlackScholes { a: 0.05, sigma: 0.3 },
            grid: GridSpec { t: 1.0, n_steps: 100, jump_adapted: true },
            mc: McSpec { n_paths: 1000, seed: 42 },
            capitals: vec![1.0, 2.0],
            alphas: vec![1.0, 2.0],
            novikov: NovikovConstants::default(),
            probe: None,
            cutoff_eps: 1e-3,
        }
    }

    #[test]
    fn valid_spec_passes() {
        assert!(base_spec().validate().is_ok());
    }

    #[test]
    fn each_violation_gets_its_own_diagnostic() {
        let mut spec = base_spec();
        spec.grid.t = -1.0;
        spec.mc.n_paths = 0;
        spec.capitals = vec![0.0];
        let report = spec.validate();
        assert_eq!(report.diagnostics.len(), 3, "got: {report}");
    }

    #[test]
    fn levy_jump_diffusion_rejects_jumps_reaching_minus_one() {
        let mut spec = base_spec();
        spec.returns = ReturnSpec::LevyJumpDiffusion {
            a: 0.05,
            sigma: 0.2,
            jumps: JumpFamily::CompoundPoisson {
                rate: 1.0,
                sizes: JumpSizeDist::Gaussian { mean: 0.0, sd: 0.1 },
            },
        };
        let report = spec.validate();
        assert!(!report.is_ok());
        assert!(
            report.diagnostics[0].contains("(−1, ∞)"),
            "unexpected diagnostic: {}",
            report.diagnostics[0]
        );
        // A point mass above −1 is fine.
        spec.returns = ReturnSpec::LevyJumpDiffusion {
            a: 0.05,
            sigma: 0.2,
            jumps: JumpFamily::CompoundPoisson {
                rate: 1.0,
                sizes: JumpSizeDist::PointMass { value: -0.5 },
            },
        };
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn tempered_tails_rejected_off_the_log_model() {
        let tempered = JumpFamily::TemperedStableTails {
            c_neg: 0.1, c_pos: 0.1,
            lambda_neg: 3.0, lambda_pos: 3.0,
            alpha_neg: 0.5, alpha_pos: 0.5,
        };
        let mut spec = base_spec();
        spec.returns = ReturnSpec::LevyJumpDiffusion { a: 0.0, sigma: 0.1, jumps: tempered };
        assert!(spec.validate().diagnostics.iter().any(|d| d.contains("hat_jump_diffusion")));

        spec.returns = ReturnSpec::HatJumpDiffusion { a: 0.0, sigma: 0.1, jumps: tempered };
        assert!(spec.validate().is_ok(), "tempered tails belong on the log model");

        // Infinite-activity tempered tails cannot drive the business process.
        spec.returns = ReturnSpec::BlackScholes { a: 0.05, sigma: 0.3 };
        spec.business.jumps = tempered;
        assert!(spec
            .validate()
            .diagnostics
            .iter()
            .any(|d| d.contains("infinite-activity business jumps unsupported")));

        // Finite-activity (both α < 0) is allowed there.
        spec.business.jumps = JumpFamily::TemperedStableTails {
            c_neg: 0.1, c_pos: 0.1,
            lambda_neg: 3.0, lambda_pos: 3.0,
            alpha_neg: -0.5, alpha_pos: -0.5,
        };
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn additive_jump_positivity_check() {
        let mut spec = base_spec();
        // g up to 2 with point-mass jumps of −0.6: worst product −1.2 ≤ −1.
        spec.returns = ReturnSpec::AdditiveIntegral {
            g: vec![(0.0, 0.5), (1.0, 2.0)],
            a: 0.0,
            sigma: 0.1,
            jumps: JumpFamily::CompoundPoisson {
                rate: 1.0,
                sizes: JumpSizeDist::PointMass { value: -0.6 },
            },
        };
        assert!(spec.validate().diagnostics.iter().any(|d| d.contains("price multiplier")));
        // Shrinking g repairs it.
        spec.returns = ReturnSpec::AdditiveIntegral {
            g: vec![(0.0, 0.5), (1.0, 1.5)],
            a: 0.0,
            sigma: 0.1,
            jumps: JumpFamily::CompoundPoisson {
                rate: 1.0,
                sizes: JumpSizeDist::PointMass { value: -0.6 },
            },
        };
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn pathwise_drift_subtracts_small_jump_mean() {
        let b = BusinessSpec {
            drift: 1.0,
            sigma: 0.0,
            jumps: JumpFamily::CompoundPoisson {
                rate: 2.0,
                sizes: JumpSizeDist::Exponential { rate: 1.0 },
            },
        };
        let m_small = JumpSizeDist::Exponential { rate: 1.0 }.mean_small();
        assert_relative_eq!(b.pathwise_drift().unwrap(), 1.0 - 2.0 * m_small, epsilon = 1e-14);
        // E X_1 = drift + big-jump mean = 1 + 2·(2/e).
        assert_relative_eq!(
            b.delta_x().unwrap(),
            1.0 + 4.0 / std::f64::consts::E,
            epsilon = 1e-13
        );
    }

    #[test]
    fn capitals_must_ascend() {
        let mut spec = base_spec();
        spec.capitals = vec![10.0, 5.0, 20.0];
        assert!(spec.validate().diagnostics.iter().any(|d| d.contains("ascending")));
        spec.capitals = vec![5.0, 5.0];
        assert!(spec.validate().diagnostics.iter().any(|d| d.contains("ascending")));
        spec.capitals = vec![5.0, 10.0, 20.0];
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn additive_knots_must_cover_horizon() {
        let mut spec = base_spec();
        spec.grid.t = 2.0;
        spec.returns = ReturnSpec::AdditiveIntegral {
            g: vec![(0.0, 0.5), (1.0, 1.0)],
            a: 0.0,
            sigma: 0.1,
            jumps: JumpFamily::None,
        };
        assert!(spec.validate().diagnostics.iter().any(|d| d.contains("cover")));
        spec.returns = ReturnSpec::AdditiveIntegral {
            g: vec![(0.0, 0.5), (2.0, 1.0)],
            a: 0.0,
            sigma: 0.1,
            jumps: JumpFamily::None,
        };
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn spec_roundtrips_through_json() {
        let spec = base_spec();
        let json = serde_json::to_string_pretty(&spec).unwrap();
        let back: ExperimentSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn config_defaults_fill_in() {
        let json = r#"{
            "business": {"drift": 1.0},
            "returns": {"model": "black_scholes", "a": 0.05, "sigma": 0.3},
            "grid": {"T": 1.0, "n_steps": 100},
            "mc": {"n_paths": 500}
        }"#;
        let spec: ExperimentSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.mc.seed, 42);
        assert_eq!(spec.capitals, vec![1.0]);
        assert_eq!(spec.alphas, vec![2.0]);
        assert_eq!(spec.novikov, NovikovConstants::default());
        assert_relative_eq!(spec.cutoff_eps, 1e-3);
        assert!(spec.grid.jump_adapted);
        assert!(spec.validate().is_ok());
    }
}
