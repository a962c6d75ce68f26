//! Closed-form and semi-analytic quantities attached to a return model.
//!
//! Everything here is derived from the log-price process R̂ = ln ε(R): its
//! Laplace exponent ψ(α) = ln E e^{−αR̂₁}, the infinite-horizon decay
//! exponent β_∞ (the strictly positive root of ψ, when one exists), the
//! finite-horizon exponent β_T (classified from the jump-measure tails), and
//! certain-ruin verdicts built from the almost-sure drift limit of R̂_t/t.
//!
//! All report types serialize to JSON-safe documents: unbounded outcomes are
//! tagged enum variants, never raw IEEE infinities.

use serde::{Deserialize, Serialize};

use crate::jumps::{JumpFamily, JumpSizeDist};
use crate::model::{BusinessSpec, ExperimentSpec, ReturnSpec};
use crate::numerics::{adaptive_simpson, NumericsError, PiecewiseLinear};

/// Default tail-moment exponent for the certain-ruin integrability condition
/// (any value in (1, 2) is admissible; the midpoint is used unless overridden).
pub const DEFAULT_TAIL_P: f64 = 1.5;

/// Default quadrature horizon for the time-dependent certain-ruin conditions.
pub const DEFAULT_S_HORIZON: f64 = 1e4;

/// Absolute tolerance guaranteed by quadrature-backed exponent evaluations.
pub const PSI_QUAD_TOL: f64 = 1e-10;

/// Bisection stops once the bracket is narrower than this…
const ROOT_TOL: f64 = 1e-10;
/// …and the residual ψ(β̂) is this small.
const RESIDUAL_TOL: f64 = 1e-9;
/// Forward-difference step for the safety-loading slope ψ'(0⁺).
const SLOPE_STEP: f64 = 1e-6;
/// Candidate exponents for the tail-integral classification of the
/// time-dependent model. The verdict is reported as a lower bound, so the
/// grid only needs to be dense enough to be informative.
const ALPHA_GRID: [f64; 11] = [2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 16.0];

/// Errors from the analytic operations.
#[derive(Debug, thiserror::Error)]
pub enum AnalyticsError {
    /// The requested quantity is not defined for this model.
    #[error("not applicable: {0}")]
    Inapplicable(String),
    /// E e^{−α·R̂₁} is infinite at the requested order.
    #[error("exponential moment diverges at alpha = {alpha} (domain bound {alpha_max})")]
    DivergentMgf { alpha: f64, alpha_max: f64 },
    /// ψ stays negative on its whole finite domain; a root, if any, lies
    /// beyond the MGF boundary and is not extrapolated.
    #[error(
        "the exponent is negative on all of (0, {alpha_max}]; a root, if any, \
         lies beyond the MGF domain and is reported unknown, not extrapolated"
    )]
    RootAtDomainBoundary { alpha_max: f64 },
    /// The drift rate defining the limit of R̂_t/t has not stabilized by the
    /// quadrature horizon.
    #[error("drift limit not stabilized by the quadrature horizon: {0}")]
    HorizonInconclusive(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

// ---- Laplace exponent -------------------------------------------------------------

/// How a Laplace-exponent evaluation is computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Provenance {
    /// Every term has a closed form.
    ClosedForm,
    /// At least one term uses adaptive quadrature with the given absolute
    /// tolerance.
    Quadrature { abs_tol: f64 },
}

/// The Laplace exponent ψ(α) = ln E e^{−αR̂₁} of the log price, prepared
/// from a return model.
///
/// ψ is convex with ψ(0) = 0. It is finite on [0, `alpha_max`), and at
/// `alpha_max` itself exactly when `finite_at_max` is set.
#[derive(Debug, Clone)]
pub struct LaplaceExponent {
    /// Coefficient of −α (the log-price drift term).
    linear: f64,
    /// Diffusion variance: coefficient of α²/2.
    sigma2: f64,
    jump: JumpTerm,
    /// Supremum of the finiteness domain (∞ when ψ is finite everywhere).
    pub alpha_max: f64,
    /// Whether ψ(alpha_max) is itself finite (meaningful only when
    /// `alpha_max` is finite).
    pub finite_at_max: bool,
    pub provenance: Provenance,
}

#[derive(Debug, Clone)]
enum JumpTerm {
    None,
    /// Price-level jumps ΔR = ξ: contributes γ(E (1+ξ)^{−α} − 1).
    Price { rate: f64, sizes: JumpSizeDist },
    /// Log-level jumps ΔR̂ = ξ, uncompensated: contributes γ(E e^{−αξ} − 1).
    Log { rate: f64, sizes: JumpSizeDist },
    /// Tempered log-level tails, compensated on |x| ≤ 1.
    LogTempered(JumpFamily),
}

/// Prepare the Laplace exponent of the log price for a Lévy return model.
///
/// Errors with [`AnalyticsError::Inapplicable`] for the time-dependent
/// integrand model (the log price is not time-homogeneous there) and for
/// jump placements the model layer rejects.
pub fn laplace_exponent(returns: &ReturnSpec) -> Result<LaplaceExponent, AnalyticsError> {
    let diffusion = |linear: f64, sigma: f64| LaplaceExponent {
        linear,
        sigma2: sigma * sigma,
        jump: JumpTerm::None,
        alpha_max: f64::INFINITY,
        finite_at_max: false,
        provenance: Provenance::ClosedForm,
    };
    match returns {
        ReturnSpec::BlackScholes { a, sigma } => Ok(diffusion(a - 0.5 * sigma * sigma, *sigma)),
        ReturnSpec::LevyJumpDiffusion { a, sigma, jumps } => match jumps {
            JumpFamily::None => Ok(diffusion(a - 0.5 * sigma * sigma, *sigma)),
            JumpFamily::CompoundPoisson { rate, sizes } => {
                if sizes.support_min() <= -1.0 {
                    return Err(AnalyticsError::Inapplicable(
                        "price-jump support must lie in (−1, ∞) for the log price to be \
                         well defined"
                            .into(),
                    ));
                }
                let provenance = match sizes {
                    JumpSizeDist::PointMass { .. } => Provenance::ClosedForm,
                    _ => Provenance::Quadrature { abs_tol: PSI_QUAD_TOL },
                };
                Ok(LaplaceExponent {
                    linear: a - rate * sizes.mean_small() - 0.5 * sigma * sigma,
                    sigma2: sigma * sigma,
                    jump: JumpTerm::Price { rate: *rate, sizes: *sizes },
                    alpha_max: f64::INFINITY,
                    finite_at_max: false,
                    provenance,
                })
            }
            JumpFamily::TemperedStableTails { .. } => Err(AnalyticsError::Inapplicable(
                "tempered tails describe log-price jumps; place them on the log-return \
                 model"
                    .into(),
            )),
        },
        ReturnSpec::HatJumpDiffusion { a, sigma, jumps } => match jumps {
            JumpFamily::None => Ok(diffusion(*a, *sigma)),
            JumpFamily::CompoundPoisson { rate, sizes } => Ok(LaplaceExponent {
                linear: *a,
                sigma2: sigma * sigma,
                jump: JumpTerm::Log { rate: *rate, sizes: *sizes },
                // Every size family has a closed-form MGF; the domain is
                // bounded only by a negative-side exponential rate.
                alpha_max: sizes.mgf_alpha_max().unwrap_or(f64::INFINITY),
                finite_at_max: false,
                provenance: Provenance::ClosedForm,
            }),
            JumpFamily::TemperedStableTails { lambda_neg, alpha_neg, .. } => {
                Ok(LaplaceExponent {
                    linear: *a,
                    sigma2: sigma * sigma,
                    jump: JumpTerm::LogTempered(*jumps),
                    alpha_max: *lambda_neg,
                    // At α = λ_neg the tail integral ∫ x^{−1−α_neg} dx still
                    // converges when α_neg > 0.
                    finite_at_max: *alpha_neg > 0.0,
                    provenance: Provenance::Quadrature { abs_tol: PSI_QUAD_TOL },
                })
            }
        },
        ReturnSpec::AdditiveIntegral { .. } => Err(AnalyticsError::Inapplicable(
            "the time-dependent integrand model has no time-homogeneous Laplace exponent"
                .into(),
        )),
    }
}

impl LaplaceExponent {
    /// Evaluate ψ(α) for α ≥ 0.
    pub fn eval(&self, alpha: f64) -> Result<f64, AnalyticsError> {
        debug_assert!(alpha >= 0.0, "the exponent is evaluated at nonnegative orders");
        let divergent = || AnalyticsError::DivergentMgf { alpha, alpha_max: self.alpha_max };
        if alpha > self.alpha_max || (alpha == self.alpha_max && !self.finite_at_max) {
            return Err(divergent());
        }
        let base = -self.linear * alpha + 0.5 * self.sigma2 * alpha * alpha;
        let jump = match &self.jump {
            JumpTerm::None => 0.0,
            JumpTerm::Price { rate, sizes } => {
                let m = sizes.pow1p_neg(alpha).ok_or_else(divergent)??;
                rate * (m - 1.0)
            }
            JumpTerm::Log { rate, sizes } => {
                let m = sizes.mgf_neg(alpha).ok_or_else(divergent)?;
                rate * (m - 1.0)
            }
            JumpTerm::LogTempered(family) => family.hat_exp_moment(alpha).ok_or_else(divergent)??,
        };
        Ok(base + jump)
    }
}

// ---- Infinite-horizon decay exponent ---------------------------------------------

/// Outcome of the decay-exponent search.
///
/// [`find_beta_infinity`] produces `Root` or `NoPositiveRoot`; the `Unknown`
/// variant is assembled at report level when the exponent itself is
/// unavailable or the root cannot be certified inside the MGF domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BetaInfinity {
    Root {
        value: f64,
        /// Final bisection bracket; ψ changes sign across it.
        bracket: (f64, f64),
        iterations: u32,
        /// ψ evaluated at `value`.
        residual: f64,
        method: String,
    },
    NoPositiveRoot { reason: String },
    Unknown { reason: String },
}

/// Find the strictly positive root of ψ — the infinite-horizon decay
/// exponent.
///
/// The safety-loading slope ψ'(0⁺) is estimated by a forward difference with
/// step 10⁻⁶; a nonnegative slope leaves no room for a positive root (ψ is
/// convex with ψ(0) = 0), reported as a value, not an error. With a negative
/// slope the root is bracketed — by doubling on an unbounded domain, by
/// geometric approach to a finite domain bound — and bisected until the
/// bracket is narrower than 10⁻¹⁰ and the residual is within 10⁻⁹.
pub fn find_beta_infinity(psi: &LaplaceExponent) -> Result<BetaInfinity, AnalyticsError> {
    let method = match psi.provenance {
        Provenance::ClosedForm => "bisection on the closed-form exponent".to_string(),
        Provenance::Quadrature { abs_tol } => {
            format!("bisection on the quadrature exponent (abs tol {abs_tol:.0e})")
        }
    };
    let slope = psi.eval(SLOPE_STEP)? / SLOPE_STEP;
    if slope >= 0.0 {
        return Ok(BetaInfinity::NoPositiveRoot {
            reason: format!("psi'(0+) ≈ {slope:.6e} ≥ 0: the safety-loading condition fails"),
        });
    }

    // Bracket the sign change: ψ(lo) < 0 < ψ(hi).
    let mut lo = SLOPE_STEP;
    let mut hi = None;
    let mut candidates: Vec<f64> = Vec::new();
    if psi.alpha_max.is_finite() {
        // Approach the domain bound geometrically; include the bound itself
        // when ψ is finite there.
        candidates.extend((1..=60).map(|k| psi.alpha_max * (1.0 - 0.5f64.powi(k))));
        if psi.finite_at_max {
            candidates.push(psi.alpha_max);
        }
    } else {
        candidates.extend((0..=48).map(|k| 2.0f64.powi(k)));
    }
    for c in candidates {
        if c <= lo {
            continue;
        }
        // The geometric sequence saturates to alpha_max in floating point;
        // stop before evaluating at a divergent boundary.
        if c >= psi.alpha_max && !psi.finite_at_max {
            break;
        }
        let v = psi.eval(c)?;
        if v == 0.0 {
            return Ok(BetaInfinity::Root {
                value: c,
                bracket: (lo, c),
                iterations: 0,
                residual: 0.0,
                method,
            });
        }
        if v > 0.0 {
            hi = Some(c);
            break;
        }
        lo = c;
    }
    let mut hi = match hi {
        Some(h) => h,
        None if psi.alpha_max.is_finite() => {
            return Err(AnalyticsError::RootAtDomainBoundary { alpha_max: psi.alpha_max });
        }
        None => {
            return Ok(BetaInfinity::NoPositiveRoot {
                reason: format!(
                    "the exponent stays negative out to alpha = {:.3e}",
                    2.0f64.powi(48)
                ),
            });
        }
    };

    let mut iterations = 0u32;
    loop {
        let mid = 0.5 * (lo + hi);
        let fmid = psi.eval(mid)?;
        let converged = hi - lo <= ROOT_TOL && fmid.abs() <= RESIDUAL_TOL;
        if converged || mid <= lo || mid >= hi || iterations >= 200 {
            return Ok(BetaInfinity::Root {
                value: mid,
                bracket: (lo, hi),
                iterations,
                residual: fmid,
                method,
            });
        }
        iterations += 1;
        if fmid < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

// ---- Finite-horizon exponent classification ---------------------------------------

/// Whether a finite classification is sharp or a certified lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certainty {
    Exact,
    LowerBound,
}

/// Finite-horizon moment classification of the discounting functionals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BetaT {
    /// Every relevant moment is finite over a finite horizon.
    Infinite { criterion: String },
    Finite { value: f64, certainty: Certainty, criterion: String },
    Unknown { reason: String },
}

/// Classify the finite-horizon exponent β_T from the return model's jump
/// structure. Never errors: configurations outside the supported families
/// come back as `Unknown` with the reason.
pub fn beta_t_classifier(returns: &ReturnSpec) -> BetaT {
    let bounded = |what: &str| BetaT::Infinite {
        criterion: format!("{what}: every exponential moment of the log price is finite over a finite horizon"),
    };
    match returns {
        ReturnSpec::BlackScholes { .. } => bounded("diffusive log price"),
        ReturnSpec::LevyJumpDiffusion { jumps, .. } => match jumps {
            JumpFamily::None => bounded("diffusive log price"),
            JumpFamily::CompoundPoisson { sizes, .. } => {
                if sizes.support_min() > -1.0 {
                    bounded("price jumps bounded away from −1 (log jumps bounded below)")
                } else {
                    BetaT::Unknown {
                        reason: "price-jump support reaches −1 or below; the model layer \
                                 rejects this configuration"
                            .into(),
                    }
                }
            }
            JumpFamily::TemperedStableTails { .. } => BetaT::Unknown {
                reason: "tempered tails describe log-price jumps; place them on the \
                         log-return model"
                    .into(),
            },
        },
        ReturnSpec::HatJumpDiffusion { jumps, .. } => match jumps {
            JumpFamily::None => bounded("diffusive log price"),
            JumpFamily::CompoundPoisson { sizes, .. } => match sizes.mgf_alpha_max() {
                Some(boundary) => BetaT::Finite {
                    value: boundary,
                    certainty: Certainty::Exact,
                    criterion: "one-sided MGF domain boundary of the log-jump sizes".into(),
                },
                None => bounded("log-jump MGF finite at every order"),
            },
            JumpFamily::TemperedStableTails { lambda_neg, .. } => {
                if *lambda_neg >= 2.0 {
                    BetaT::Finite {
                        value: *lambda_neg,
                        certainty: Certainty::Exact,
                        criterion: "negative-tail tempering rate".into(),
                    }
                } else {
                    BetaT::Unknown {
                        reason: format!(
                            "negative-tail tempering rate {lambda_neg} < 2 falls outside \
                             the resolved regime"
                        ),
                    }
                }
            }
        },
        ReturnSpec::AdditiveIntegral { g, jumps, .. } => classify_additive(g, jumps),
    }
}

/// Grid classification for the time-dependent model: the largest candidate
/// exponent α ≥ 2 whose tail integral ∫₀^T∫_{u<−1} e^{−αu·g(s)} ν(du) ds is
/// certified finite. Divergence is decided at the peak of g (the binding
/// point), and the integral itself is evaluated by quadrature over the knot
/// table's span as a cross-check.
fn classify_additive(g: &[(f64, f64)], jumps: &JumpFamily) -> BetaT {
    if matches!(jumps, JumpFamily::TemperedStableTails { .. }) {
        return BetaT::Unknown {
            reason: "tempered tails are not supported on the time-dependent model".into(),
        };
    }
    let curve = match PiecewiseLinear::new(g.to_vec()) {
        Ok(c) => c,
        Err(e) => return BetaT::Unknown { reason: format!("bad integrand table: {e}") },
    };
    if jumps.support_min() >= -1.0 {
        return BetaT::Infinite {
            criterion: "no jump mass below −1: the tail integral vanishes at every exponent"
                .into(),
        };
    }
    let (_, g_max) = curve.range_on(curve.first_s(), curve.last_s());
    for &alpha in ALPHA_GRID.iter().rev() {
        if tail_integral_over_span(&curve, jumps, alpha).is_some() {
            return BetaT::Finite {
                value: alpha,
                certainty: Certainty::LowerBound,
                criterion: format!(
                    "largest grid exponent whose tail integral over jumps below −1 is \
                     finite (peak integrand value g = {g_max})"
                ),
            };
        }
    }
    BetaT::Unknown {
        reason: "the tail integral over jumps below −1 already diverges at exponent 2".into(),
    }
}

/// ∫ over the knot span of s ↦ ∫_{u<−1} e^{−α·g(s)·u} ν(du), or `None` when
/// the inner integral diverges somewhere (decided at the peak of g, where
/// the exponential tilt is strongest).
fn tail_integral_over_span(
    curve: &PiecewiseLinear,
    jumps: &JumpFamily,
    alpha: f64,
) -> Option<f64> {
    let (_, g_max) = curve.range_on(curve.first_s(), curve.last_s());
    jumps.nu_exp_below_minus_one(-alpha * g_max)?;
    let lo = curve.first_s().min(0.0);
    let hi = curve.last_s().max(lo + 1.0);
    adaptive_simpson(
        |s| {
            jumps
                .nu_exp_below_minus_one(-alpha * curve.eval(s))
                .unwrap_or(f64::INFINITY)
        },
        lo,
        hi,
        1e-9,
    )
    .ok()
    .filter(|v| v.is_finite())
}

// ---- Combined exponent report ------------------------------------------------------

/// Finite- and infinite-horizon exponents with their defining criteria.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaReport {
    pub beta_t: BetaT,
    pub beta_inf: BetaInfinity,
}

/// Assemble the full exponent report for a return model. Failures of the
/// infinite-horizon search degrade to `Unknown` outcomes, never errors.
pub fn beta_report(returns: &ReturnSpec) -> BetaReport {
    let beta_inf = match laplace_exponent(returns).and_then(|psi| find_beta_infinity(&psi)) {
        Ok(outcome) => outcome,
        Err(e) => BetaInfinity::Unknown { reason: e.to_string() },
    };
    BetaReport { beta_t: beta_t_classifier(returns), beta_inf }
}

// ---- Certain ruin -------------------------------------------------------------------

/// Verdict of a certain-ruin test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuinVerdict {
    CertainRuin,
    ConditionNotMet,
    Inapplicable,
}

/// One checked condition of a certain-ruin test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub name: String,
    pub satisfied: bool,
    /// Computed value when the condition is quantitative.
    pub value: Option<f64>,
    pub detail: String,
}

/// Certain-ruin test report: the verdict, the drift limit of R̂_t/t, and one
/// entry per checked condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertainRuinReport {
    pub verdict: RuinVerdict,
    /// Almost-sure limit of R̂_t/t (`None` when the business precondition
    /// fails and the drift was not computed).
    #[serde(rename = "D")]
    pub drift_limit: Option<f64>,
    pub p_used: Option<f64>,
    pub conditions: Vec<ConditionCheck>,
}

/// The business process must be a Brownian motion with nonpositive drift:
/// X = a·t + σ·W with a ≤ 0, σ ≥ 0, not both zero, and no jumps.
fn business_form_check(business: &BusinessSpec) -> ConditionCheck {
    let ok = business.jumps.is_none()
        && business.drift <= 0.0
        && business.sigma >= 0.0
        && (business.drift != 0.0 || business.sigma > 0.0);
    ConditionCheck {
        name: "business_brownian_nonpositive_drift".into(),
        satisfied: ok,
        value: None,
        detail: "X = a·t + σ·W with a ≤ 0, σ ≥ 0, not both zero, and no jumps".into(),
    }
}

fn inapplicable_report(p: f64, form: ConditionCheck) -> CertainRuinReport {
    CertainRuinReport {
        verdict: RuinVerdict::Inapplicable,
        drift_limit: None,
        p_used: Some(p),
        conditions: vec![form],
    }
}

fn check_p(p: f64) -> Result<(), AnalyticsError> {
    if 1.0 < p && p < 2.0 {
        Ok(())
    } else {
        Err(AnalyticsError::Inapplicable(format!(
            "tail-moment exponent p must lie in (1, 2), got {p}"
        )))
    }
}

/// Certain-ruin test for a time-homogeneous return model.
///
/// Computes the almost-sure drift limit D of R̂_t/t from the model's
/// characteristics and checks the log-jump tail-moment integrability at
/// order `p`. Ruin is certain (probability one, any initial capital) when
/// the business is a Brownian motion with nonpositive drift, the tail moment
/// is finite, and D < 0 strictly.
pub fn certain_ruin_levy(
    returns: &ReturnSpec,
    business: &BusinessSpec,
    p: f64,
) -> Result<CertainRuinReport, AnalyticsError> {
    check_p(p)?;
    let form = business_form_check(business);
    if !form.satisfied {
        return Ok(inapplicable_report(p, form));
    }
    let support_err = || {
        AnalyticsError::Inapplicable(
            "price-jump support must lie in (−1, ∞) for the log price to be well defined"
                .into(),
        )
    };
    // Tail moment ∫|Δ log-price|^p over |Δ| > 1, and the drift limit D.
    let (tail, drift) = match returns {
        ReturnSpec::BlackScholes { a, sigma } => (0.0, a - 0.5 * sigma * sigma),
        ReturnSpec::LevyJumpDiffusion { a, sigma, jumps } => match jumps {
            JumpFamily::None => (0.0, a - 0.5 * sigma * sigma),
            JumpFamily::CompoundPoisson { rate, sizes } => {
                let tail = rate * sizes.log1p_abs_pow_big(p).ok_or_else(support_err)??;
                let log_mean = sizes.log1p_mean().ok_or_else(support_err)??;
                (tail, a - 0.5 * sigma * sigma + rate * (log_mean - sizes.mean_small()))
            }
            JumpFamily::TemperedStableTails { .. } => {
                return Err(AnalyticsError::Inapplicable(
                    "tempered tails describe log-price jumps; place them on the \
                     log-return model"
                        .into(),
                ));
            }
        },
        ReturnSpec::HatJumpDiffusion { a, jumps, .. } => match jumps {
            JumpFamily::None => (0.0, *a),
            // Log-jumps are uncompensated here: E R̂₁ = a + γ·Eξ.
            JumpFamily::CompoundPoisson { rate, sizes } => {
                (rate * sizes.abs_pow_big(p)?, a + rate * sizes.mean())
            }
            // Tempered tails are compensated on |x| ≤ 1: E R̂₁ = a + ∫_{|x|>1}xν.
            JumpFamily::TemperedStableTails { .. } => {
                (jumps.nu_abs_pow_big(p)?, a + jumps.nu_mean_big()?)
            }
        },
        ReturnSpec::AdditiveIntegral { .. } => {
            return Err(AnalyticsError::Inapplicable(
                "use the time-dependent certain-ruin test for the integrand model".into(),
            ));
        }
    };
    let conditions = vec![
        form,
        ConditionCheck {
            name: "tail_moment_integrable".into(),
            satisfied: true,
            value: Some(tail),
            detail: format!("∫ |Δ log-price|^{p} over jumps with |Δ log-price| > 1"),
        },
        ConditionCheck {
            name: "negative_drift_limit".into(),
            satisfied: drift < 0.0,
            value: Some(drift),
            detail: "almost-sure limit of R̂_t/t must be strictly negative".into(),
        },
    ];
    let verdict = if conditions.iter().all(|c| c.satisfied) {
        RuinVerdict::CertainRuin
    } else {
        RuinVerdict::ConditionNotMet
    };
    Ok(CertainRuinReport { verdict, drift_limit: Some(drift), p_used: Some(p), conditions })
}

/// Certain-ruin test for the time-dependent model R_t = ∫₀ᵗ g(s−) dL_s.
///
/// Checks, for the tabulated integrand g (constant beyond its last knot):
/// (i) decay of the continuous quadratic variation, ∫₀^∞ (1+s)^{−2} σ²g(s)² ds < ∞;
/// (ii) a compensated log-moment bound at order `p` ∈ (1, 2); and
/// (iii) a strictly negative limit D of the drift rate of ln ε(R).
/// Head integrals run by quadrature over the knot span; the constant-g
/// remainder integrates in closed form. Stability of the drift rate is
/// checked over the last decade before `s_horizon` and reported as
/// [`AnalyticsError::HorizonInconclusive`] when it still moves.
pub fn certain_ruin_additive(
    returns: &ReturnSpec,
    business: &BusinessSpec,
    p: f64,
    s_horizon: f64,
) -> Result<CertainRuinReport, AnalyticsError> {
    check_p(p)?;
    if !(s_horizon > 1.0 && s_horizon.is_finite()) {
        return Err(AnalyticsError::Inapplicable(format!(
            "quadrature horizon must be finite and exceed 1, got {s_horizon}"
        )));
    }
    let ReturnSpec::AdditiveIntegral { g, a, sigma, jumps } = returns else {
        return Err(AnalyticsError::Inapplicable(
            "the time-dependent certain-ruin test needs the integrand model".into(),
        ));
    };
    if matches!(jumps, JumpFamily::TemperedStableTails { .. }) {
        return Err(AnalyticsError::Inapplicable(
            "tempered tails are not supported on the time-dependent model".into(),
        ));
    }
    let form = business_form_check(business);
    if !form.satisfied {
        return Ok(inapplicable_report(p, form));
    }
    let curve = PiecewiseLinear::new(g.clone())?;
    // g is constant beyond the last knot, so quadrature only needs the knot
    // span; the remainder integrates in closed form.
    let s_flat = curve.last_s().max(0.0);
    let g_inf = curve.tail_value();

    // (i) ∫₀^∞ (1+s)^{−2} dσ²∫g² — head over the knot span plus the exact
    // constant-tail remainder σ²g_∞²/(1+s_flat).
    let head_i = if *sigma > 0.0 && s_flat > 0.0 {
        let g2 = |s: f64| {
            let v = curve.eval(s);
            v * v / ((1.0 + s) * (1.0 + s))
        };
        sigma * sigma * integral_with_knot_cuts(&curve, g2, 0.0, s_flat)?
    } else {
        0.0
    };
    let value_i = head_i + sigma * sigma * g_inf * g_inf / (1.0 + s_flat);

    // (ii) ∫₀^∞ (1+s)^{−p}·m_p(s) ds with
    // m_p(s) = ∫ min(ln(1+g(s)u)², |ln(1+g(s)u)|^p) ν(du).
    let inner = |gv: f64| -> Result<f64, NumericsError> {
        jumps.nu_expect_compensated(|u| {
            let l = (gv * u).ln_1p().abs();
            if l <= 1.0 {
                l * l
            } else {
                l.powf(p)
            }
        })
    };
    let head_ii = if jumps.is_none() || s_flat == 0.0 {
        0.0
    } else {
        let mut acc = 0.0;
        let mut cuts: Vec<f64> = vec![0.0];
        cuts.extend(curve.knots.iter().map(|k| k.0).filter(|&s| s > 0.0 && s < s_flat));
        cuts.push(s_flat);
        for w in cuts.windows(2) {
            acc += adaptive_simpson(
                |s| match inner(curve.eval(s)) {
                    Ok(v) => v * (1.0 + s).powf(-p),
                    Err(_) => f64::NAN,
                },
                w[0],
                w[1],
                1e-9,
            )?;
        }
        acc
    };
    let inner_inf = inner(g_inf)?;
    let value_ii = head_ii + inner_inf * (1.0 + s_flat).powf(1.0 - p) / (p - 1.0);
    if !value_ii.is_finite() {
        return Err(NumericsError::QuadratureFailure { a: 0.0, b: s_flat, tol: 1e-9 }.into());
    }

    // (iii) Drift rate of ln ε(R) at integrand level gv:
    // φ(gv) = a·gv − σ²gv²/2 + ∫(ln(1+gv·u) − gv·u·1_{|u|≤1}) ν(du),
    // whose limit is D = φ(g_∞).
    let phi = |gv: f64| -> Result<f64, AnalyticsError> {
        let jump_term = match jumps {
            JumpFamily::None => 0.0,
            JumpFamily::CompoundPoisson { rate, sizes } => {
                rate * (sizes.expect(|u| (gv * u).ln_1p())? - gv * sizes.mean_small())
            }
            JumpFamily::TemperedStableTails { .. } => unreachable!("rejected above"),
        };
        Ok(a * gv - 0.5 * sigma * sigma * gv * gv + jump_term)
    };
    let d_now = phi(curve.eval(s_horizon))?;
    let d_prev = phi(curve.eval(s_horizon / 10.0))?;
    if (d_now - d_prev).abs() > 1e-4 * d_now.abs().max(1.0) {
        return Err(AnalyticsError::HorizonInconclusive(format!(
            "drift rate moved from {d_prev:.6e} at s = {:.1} to {d_now:.6e} at s = {:.1}",
            s_horizon / 10.0,
            s_horizon
        )));
    }

    let conditions = vec![
        form,
        ConditionCheck {
            name: "i_quadratic_variation_decay".into(),
            satisfied: value_i.is_finite(),
            value: Some(value_i),
            detail: "∫₀^∞ (1+s)^{−2} σ²g(s)² ds".into(),
        },
        ConditionCheck {
            name: "ii_tail_log_moment".into(),
            satisfied: value_ii.is_finite(),
            value: Some(value_ii),
            detail: format!(
                "∫₀^∞ (1+s)^{{−{p}}} ∫ min(ln(1+g·u)², |ln(1+g·u)|^{p}) ν(du) ds"
            ),
        },
        ConditionCheck {
            name: "iii_negative_drift_limit".into(),
            satisfied: d_now < 0.0,
            value: Some(d_now),
            detail: "limit of the drift rate of ln ε(R) must be strictly negative".into(),
        },
    ];
    let verdict = if conditions.iter().all(|c| c.satisfied) {
        RuinVerdict::CertainRuin
    } else {
        RuinVerdict::ConditionNotMet
    };
    Ok(CertainRuinReport { verdict, drift_limit: Some(d_now), p_used: Some(p), conditions })
}

/// Quadrature of `f` over `[lo, hi]` split at the curve's interior knots, so
/// each adaptive pass sees a smooth integrand.
fn integral_with_knot_cuts(
    curve: &PiecewiseLinear,
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
) -> Result<f64, NumericsError> {
    let mut cuts = vec![lo];
    cuts.extend(curve.knots.iter().map(|k| k.0).filter(|&s| s > lo && s < hi));
    cuts.push(hi);
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        acc += adaptive_simpson(&f, w[0], w[1], 1e-11)?;
    }
    Ok(acc)
}

/// Certain-ruin verdict for any return model, with the default tail-moment
/// exponent and quadrature horizon.
pub fn certain_ruin(spec: &ExperimentSpec) -> Result<CertainRuinReport, AnalyticsError> {
    certain_ruin_with(spec, DEFAULT_TAIL_P, DEFAULT_S_HORIZON)
}

/// Certain-ruin verdict dispatching on the return model.
pub fn certain_ruin_with(
    spec: &ExperimentSpec,
    p: f64,
    s_horizon: f64,
) -> Result<CertainRuinReport, AnalyticsError> {
    match spec.returns {
        ReturnSpec::AdditiveIntegral { .. } => {
            certain_ruin_additive(&spec.returns, &spec.business, p, s_horizon)
        }
        _ => certain_ruin_levy(&spec.returns, &spec.business, p),
    }
}

// ---- Tests -----------------------------------------------------------------------
