//! Ruin-probability upper bounds: explicit constants C₁–C₃ per moment
//! regime, closed-form and Monte Carlo moments of the discounting
//! functionals, and the assembly
//! `bound(y) = (C1·E I_T^α + C2·E J_T^{α/2} + C3·E J_T(α))/y^α`
//! for finite horizons, with monotone limits for T = ∞.
//!
//! The maximal-inequality constants K₁–K₃ have no sharp published values;
//! they are configuration ([`NovikovConstants`], default 8 each) and every
//! report that uses them carries a visible warning that default-K bounds
//! demonstrate shape and monotonicity rather than certified domination.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::analytics::{
    laplace_exponent, AnalyticsError, BetaInfinity, BetaT, LaplaceExponent,
};
use crate::model::{BusinessSpec, GridSpec, NovikovConstants, ReturnSpec};
use crate::numerics::{mean_and_se, NumericsError};
use crate::simulate::{simulate_return_path, RngStream, SimError};

/// Errors from bound construction.
#[derive(Debug, thiserror::Error)]
pub enum BoundsError {
    #[error("alpha = {alpha} is out of range: {detail}")]
    AlphaOutOfRange { alpha: f64, detail: String },
    #[error("required moment unavailable: {0}")]
    MomentUnavailable(String),
    #[error(
        "the infinite-horizon moment diverges at alpha = {alpha}: the exponent \
         psi(alpha) = {psi} is not negative"
    )]
    InfiniteHorizonDivergent { alpha: f64, psi: f64 },
    #[error("the big-jump tail integral of |x|^alpha diverges at alpha = {alpha}")]
    TailIntegralDiverges { alpha: f64 },
    #[error("invalid constants: {0}")]
    InvalidConstants(String),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Simulation(#[from] SimError),
}

// ---- Moment regimes and constants ------------------------------------------------------

/// The three moment regimes of the bound's proof-level constants. The
/// constants may jump across regime borders; continuity is promised only
/// within a regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// 0 < α ≤ 1.
    UpToOne,
    /// 1 < α ≤ 2.
    OneToTwo,
    /// α > 2.
    AboveTwo,
}

impl Regime {
    pub fn of(alpha: f64) -> Result<Self, BoundsError> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(BoundsError::AlphaOutOfRange {
                alpha,
                detail: "the moment order must be a finite positive number".into(),
            });
        }
        Ok(if alpha <= 1.0 {
            Regime::UpToOne
        } else if alpha <= 2.0 {
            Regime::OneToTwo
        } else {
            Regime::AboveTwo
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Regime::UpToOne => "(0,1]",
            Regime::OneToTwo => "(1,2]",
            Regime::AboveTwo => "(2,inf)",
        }
    }
}

/// Provenance of the maximal-inequality constants: "default" when they are
/// the library placeholders, "user" when configured explicitly.
pub fn novikov_provenance(k: &NovikovConstants) -> &'static str {
    if *k == NovikovConstants::default() {
        "default"
    } else {
        "user"
    }
}

/// The assembled constants of the bound for one moment order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub alpha: f64,
    pub regime: Regime,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub novikov: NovikovConstants,
    /// "default" or "user"; see [`novikov_provenance`].
    pub novikov_provenance: String,
    /// Human-readable caveats: the default-K warning whenever a K actually
    /// multiplies a nonzero integral, and a note on the conservative 4^α
    /// prefactor carried by the jump terms in the upper regimes.
    pub notes: Vec<String>,
}

/// E|W₁|^α = 2^{α/2}·Γ((α+1)/2)/√π for a standard normal W₁.
fn abs_normal_moment(alpha: f64) -> f64 {
    2.0f64.powf(0.5 * alpha) * gamma(0.5 * (alpha + 1.0)) / std::f64::consts::PI.sqrt()
}

/// Compute (C1, C2, C3) for the business process at moment order α.
///
/// Per regime:
/// - 0 < α ≤ 1: C1 = 4^α|a_X|^α; C2 = 2^{(5α+2)/2}Γ((α+1)/2)σ_X^α/√π +
///   K1·4^α(∫_{|x|≤1}x²ν_X)^{α/2}; C3 = 4^α∫_{|x|>1}|x|^αν_X.
/// - 1 < α ≤ 2: the big-jump term moves into C1 as 4^α(∫_{|x|>1}|x|^αν_X)^α
///   and C3 = 0.
/// - α > 2: K2 replaces K1 in C2, and C3 = K3·4^α∫_{|x|≤1}|x|^αν_X.
pub fn bound_constants(
    business: &BusinessSpec,
    alpha: f64,
    k: &NovikovConstants,
) -> Result<BoundConstants, BoundsError> {
    let regime = Regime::of(alpha)?;
    if !(k.k1 >= 0.0 && k.k2 >= 0.0 && k.k3 >= 0.0) {
        return Err(BoundsError::InvalidConstants(format!(
            "maximal-inequality constants must be nonnegative, got ({}, {}, {})",
            k.k1, k.k2, k.k3
        )));
    }
    let four_alpha = 4.0f64.powf(alpha);
    let nu = &business.jumps;

    // Tail moment of the big jumps — must be finite for the bound to exist.
    let big = nu.nu_abs_pow_big(alpha)?;
    if !big.is_finite() {
        return Err(BoundsError::TailIntegralDiverges { alpha });
    }
    let sq_small = nu.nu_sq_small()?;

    let drift_part = four_alpha * business.drift.abs().powf(alpha);
    let brownian_part =
        2.0 * four_alpha * abs_normal_moment(alpha) * business.sigma.powf(alpha);
    let gaussian_c2 = |k_small: f64| brownian_part + k_small * four_alpha * sq_small.powf(0.5 * alpha);

    let mut notes = Vec::new();
    let (c1, c2, c3, k_used_on) = match regime {
        Regime::UpToOne => (drift_part, gaussian_c2(k.k1), four_alpha * big, sq_small > 0.0),
        Regime::OneToTwo => {
            let c1 = drift_part + four_alpha * big.powf(alpha);
            if big > 0.0 {
                notes.push(
                    "the big-jump component of C1 carries the conservative 4^alpha \
                     prefactor from the preceding Markov step"
                        .to_string(),
                );
            }
            (c1, gaussian_c2(k.k1), 0.0, sq_small > 0.0)
        }
        Regime::AboveTwo => {
            let small_abs = nu.nu_abs_pow_small(alpha)?;
            let c1 = drift_part + four_alpha * big.powf(alpha);
            let c3 = k.k3 * four_alpha * small_abs;
            if small_abs > 0.0 {
                notes.push(
                    "the compensated small-jump component of C3 carries the conservative \
                     4^alpha prefactor from the preceding Markov step"
                        .to_string(),
                );
            }
            (c1, gaussian_c2(k.k2), c3, sq_small > 0.0 || small_abs > 0.0)
        }
    };

    let provenance = novikov_provenance(k);
    if k_used_on && provenance == "default" {
        notes.push(
            "Novikov-type constants are the library defaults (K1 = K2 = K3 = 8); sharp \
             values are not published, so this bound demonstrates shape and monotonicity \
             rather than certified domination"
                .to_string(),
        );
    }

    Ok(BoundConstants {
        alpha,
        regime,
        c1,
        c2,
        c3,
        novikov: *k,
        novikov_provenance: provenance.to_string(),
        notes,
    })
}

// ---- Moments of the discounting functionals ---------------------------------------------

/// Horizon of a moment set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Horizon {
    Finite { t: f64 },
    Infinite,
}

/// Where a moment value came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MomentSource {
    ClosedForm,
    MonteCarlo { n: usize, std_err: f64 },
}

/// One moment value with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moment {
    pub value: f64,
    pub source: MomentSource,
}

/// The three moments the bound consumes: E(I_T^α), E(J_T^{α/2}) with
/// J ≡ J(2), and E(J_T(α)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub alpha: f64,
    pub horizon: Horizon,
    pub e_i_alpha: Moment,
    pub e_j_half: Moment,
    pub e_j_alpha: Moment,
}

/// How finite-horizon moments are computed. E(I_T^α) and E(J_T^{α/2}) have
/// no finite-horizon closed form, so both modes carry Monte Carlo
/// parameters; the mode decides the source of E(J_T(α)) only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MomentMode {
    /// All three moments by Monte Carlo on a common set of return paths.
    MonteCarlo { n_paths: usize, seed: u64 },
    /// E(J_T(α)) from the Lévy exponent, the other two by Monte Carlo.
    ClosedFormJ { n_paths: usize, seed: u64 },
}

/// E(J_T(α)) = ∫₀ᵀ e^{tψ(α)} dt through the exact primitive: expm1(Tψ)/ψ,
/// degenerating to T when ψ(α) = 0. For T = ∞ the integral converges
/// exactly when ψ(α) < 0 and equals −1/ψ(α).
pub fn j_alpha_closed_form(
    psi: &LaplaceExponent,
    horizon: Horizon,
    alpha: f64,
) -> Result<f64, BoundsError> {
    let p = psi.eval(alpha)?;
    match horizon {
        Horizon::Finite { t } => Ok(if p == 0.0 { t } else { (t * p).exp_m1() / p }),
        Horizon::Infinite => {
            if p < 0.0 {
                Ok(-1.0 / p)
            } else {
                Err(BoundsError::InfiniteHorizonDivergent { alpha, psi: p })
            }
        }
    }
}

/// Infinite-horizon integer moments by the Fubini recursion:
/// E(I_∞^n) = n!/∏_{k≤n}(−ψ(k)); with `scale = 2` the same product over
/// ψ(2k) gives E(J_∞(2)^n). Requires ψ(scale·k) < 0 for every k ≤ n.
fn integer_moment_infinite(
    psi: &LaplaceExponent,
    n: u32,
    scale: f64,
) -> Result<f64, BoundsError> {
    let mut value = 1.0;
    for k in 1..=n {
        let arg = scale * f64::from(k);
        let p = psi.eval(arg)?;
        if p >= 0.0 {
            return Err(BoundsError::InfiniteHorizonDivergent { alpha: arg, psi: p });
        }
        value *= f64::from(k) / -p;
    }
    Ok(value)
}

/// `x` as a positive integer when it is one (to floating-point exactness).
fn as_positive_integer(x: f64) -> Option<u32> {
    let n = x.round();
    if (x - n).abs() < 1e-12 && n >= 1.0 && n <= f64::from(u32::MAX) {
        Some(n as u32)
    } else {
        None
    }
}

/// Finite-horizon moment set. Monte Carlo moments average I_T^α, J_T^{α/2},
/// and J_T(α) over independent return paths (one RNG stream per path, so
/// estimates are reproducible and order-independent); standard errors are
/// sample standard deviation over √n. `cutoff_eps` is the small-jump cutoff
/// passed through to the simulator for tempered tails.
pub fn moments(
    returns: &ReturnSpec,
    grid: &GridSpec,
    alpha: f64,
    mode: &MomentMode,
    cutoff_eps: f64,
) -> Result<MomentSet, BoundsError> {
    Regime::of(alpha)?;
    let (&(mut n_paths), &seed, closed_j) = match mode {
        MomentMode::MonteCarlo { n_paths, seed } => (n_paths, seed, false),
        MomentMode::ClosedFormJ { n_paths, seed } => (n_paths, seed, true),
    };
    if n_paths == 0 {
        n_paths = 1;
    }

    let mut i_pow = Vec::with_capacity(n_paths);
    let mut j_half = Vec::with_capacity(n_paths);
    let mut j_alpha = Vec::with_capacity(n_paths);
    let request = [alpha];
    for k in 0..n_paths {
        let stream = RngStream::new(seed, k as u64);
        let path = simulate_return_path(returns, grid, &request, cutoff_eps, &stream)?;
        i_pow.push(path.i_t().powf(alpha));
        let j2 = path.j_t(2.0).expect("J(2) always simulated");
        j_half.push(j2.powf(0.5 * alpha));
        j_alpha.push(path.j_t(alpha).expect("requested exponent simulated"));
    }
    let mc = |xs: &[f64]| {
        let (value, std_err) = mean_and_se(xs);
        Moment { value, source: MomentSource::MonteCarlo { n: n_paths, std_err } }
    };

    let e_j_alpha = if closed_j {
        let psi = laplace_exponent(returns)?;
        Moment {
            value: j_alpha_closed_form(&psi, Horizon::Finite { t: grid.t }, alpha)?,
            source: MomentSource::ClosedForm,
        }
    } else {
        mc(&j_alpha)
    };

    Ok(MomentSet {
        alpha,
        horizon: Horizon::Finite { t: grid.t },
        e_i_alpha: mc(&i_pow),
        e_j_half: mc(&j_half),
        e_j_alpha,
    })
}

/// Infinite-horizon moment set, entirely in closed form. E(J_∞(α)) needs
/// ψ(α) < 0; the I-moment needs integer α and the J(2)-moment integer α/2
/// (the Fubini product formulas) — fractional orders have no closed form at
/// T = ∞ and Monte Carlo cannot reach an infinite horizon.
pub fn moments_infinite(returns: &ReturnSpec, alpha: f64) -> Result<MomentSet, BoundsError> {
    Regime::of(alpha)?;
    let psi = laplace_exponent(returns)?;
    let e_j_alpha = j_alpha_closed_form(&psi, Horizon::Infinite, alpha)?;
    let n = as_positive_integer(alpha).ok_or_else(|| {
        BoundsError::MomentUnavailable(format!(
            "E(I^alpha) at an infinite horizon has a closed form only for integer alpha \
             (got {alpha}); Monte Carlo cannot reach an infinite horizon"
        ))
    })?;
    let m = as_positive_integer(0.5 * alpha).ok_or_else(|| {
        BoundsError::MomentUnavailable(format!(
            "E(J^{{alpha/2}}) at an infinite horizon has a closed form only for even \
             integer alpha (got {alpha})"
        ))
    })?;
    let closed = |value: f64| Moment { value, source: MomentSource::ClosedForm };
    Ok(MomentSet {
        alpha,
        horizon: Horizon::Infinite,
        e_i_alpha: closed(integer_moment_infinite(&psi, n, 1.0)?),
        e_j_half: closed(integer_moment_infinite(&psi, m, 2.0)?),
        e_j_alpha: closed(e_j_alpha),
    })
}

// ---- Bound assembly ----------------------------------------------------------------------

/// The serializable record of one assembled bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub alpha: f64,
    pub regime: Regime,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub moments: MomentSet,
    /// Whether α was positively verified to lie below the moment exponent
    /// (false when the classifier could not decide — the bound is then
    /// reported on the user's responsibility).
    pub alpha_below_beta_checked: bool,
    /// The big-jump tail integral was computed and is finite (construction
    /// fails otherwise; the flag records that the check ran).
    pub tail_integral_finite: bool,
    pub novikov: NovikovConstants,
    pub novikov_provenance: String,
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn new(constants: &BoundConstants, moments: &MomentSet, beta_checked: bool) -> Self {
        assert_eq!(
            constants.alpha, moments.alpha,
            "constants and moments must be built for the same alpha"
        );
        Self {
            alpha: constants.alpha,
            regime: constants.regime,
            c1: constants.c1,
            c2: constants.c2,
            c3: constants.c3,
            moments: moments.clone(),
            alpha_below_beta_checked: beta_checked,
            tail_integral_finite: true,
            novikov: constants.novikov,
            novikov_provenance: constants.novikov_provenance.clone(),
            notes: constants.notes.clone(),
        }
    }

    /// (C1·E I^α + C2·E J^{α/2} + C3·E J(α))/y^α. `y` must be positive.
    pub fn bound(&self, y: f64) -> f64 {
        debug_assert!(y > 0.0, "initial capital must be positive");
        (self.c1 * self.moments.e_i_alpha.value
            + self.c2 * self.moments.e_j_half.value
            + self.c3 * self.moments.e_j_alpha.value)
            / y.powf(self.alpha)
    }
}

fn check_alignment(constants: &BoundConstants, moments: &MomentSet) -> Result<(), BoundsError> {
    if constants.alpha != moments.alpha {
        return Err(BoundsError::MomentUnavailable(format!(
            "moment set is for alpha = {}, constants for alpha = {}",
            moments.alpha, constants.alpha
        )));
    }
    Ok(())
}

/// Verify α < β_T. `Ok(true)` means positively verified; `Ok(false)` means
/// the classifier could not decide and the caller proceeds flagged.
fn beta_t_admits(alpha: f64, beta_t: &BetaT) -> Result<bool, BoundsError> {
    match beta_t {
        BetaT::Infinite { .. } => Ok(true),
        BetaT::Finite { value, .. } => {
            if alpha < *value {
                Ok(true)
            } else {
                Err(BoundsError::AlphaOutOfRange {
                    alpha,
                    detail: format!("the moment exponent over this horizon is beta_T = {value}"),
                })
            }
        }
        BetaT::Unknown { .. } => Ok(false),
    }
}

/// Verify α < β_∞. A missing positive root is not a veto: when the exponent
/// stays negative the moments exist for every α (and when the safety loading
/// fails, the moment computation itself already diverged).
fn beta_inf_admits(alpha: f64, beta_inf: &BetaInfinity) -> Result<bool, BoundsError> {
    match beta_inf {
        BetaInfinity::Root { value, .. } => {
            if alpha < *value {
                Ok(true)
            } else {
                Err(BoundsError::AlphaOutOfRange {
                    alpha,
                    detail: format!("the decay exponent is beta_infinity = {value}"),
                })
            }
        }
        BetaInfinity::NoPositiveRoot { .. } | BetaInfinity::Unknown { .. } => Ok(false),
    }
}

/// Assemble the finite-horizon report: checks α < β_T and the moment
/// horizon. Call `bound(y)` on the result to evaluate it at each capital.
pub fn finite_time_report(
    constants: &BoundConstants,
    moments: &MomentSet,
    beta_t: &BetaT,
) -> Result<BoundReport, BoundsError> {
    check_alignment(constants, moments)?;
    if !matches!(moments.horizon, Horizon::Finite { .. }) {
        return Err(BoundsError::MomentUnavailable(
            "the finite-horizon bound needs finite-horizon moments".into(),
        ));
    }
    let checked = beta_t_admits(constants.alpha, beta_t)?;
    Ok(BoundReport::new(constants, moments, checked))
}

/// The finite-horizon bound at capital `y`: checks α < β_T and the moment
/// horizon, then evaluates (C1·E I^α + C2·E J^{α/2} + C3·E J(α))/y^α.
pub fn finite_time_bound(
    constants: &BoundConstants,
    moments: &MomentSet,
    beta_t: &BetaT,
    y: f64,
) -> Result<f64, BoundsError> {
    Ok(finite_time_report(constants, moments, beta_t)?.bound(y))
}

/// Assemble the infinite-horizon report from T = ∞ moments, checking α < β_∞.
pub fn infinite_time_report(
    constants: &BoundConstants,
    moments: &MomentSet,
    beta_inf: &BetaInfinity,
) -> Result<BoundReport, BoundsError> {
    check_alignment(constants, moments)?;
    if moments.horizon != Horizon::Infinite {
        return Err(BoundsError::MomentUnavailable(
            "the infinite-horizon bound needs T = infinity moments".into(),
        ));
    }
    let checked = beta_inf_admits(constants.alpha, beta_inf)?;
    Ok(BoundReport::new(constants, moments, checked))
}

/// The infinite-horizon bound at capital `y`, from T = ∞ moments.
pub fn infinite_time_bound(
    constants: &BoundConstants,
    moments: &MomentSet,
    beta_inf: &BetaInfinity,
    y: f64,
) -> Result<f64, BoundsError> {
    Ok(infinite_time_report(constants, moments, beta_inf)?.bound(y))
}

// ---- Tests ----------------------------------------------------------------------------------
