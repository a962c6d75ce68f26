//! Path simulation: the return process R, its exponential transform
//! R̂ = ln ε(R), the discounting functionals I_t and J_t(α), the business
//! process X, and the discounted integral Z_t = ∫₀ᵗ dX_s/ε(R)_{s−} whose
//! running minimum decides ruin.
//!
//! The grid is jump-adapted by default: compound-Poisson jump epochs are
//! inserted as exact grid nodes, so R̂ is exact in distribution at every
//! node and the left-point quadrature sees every jump. Tempered-stable
//! log-jumps are approximated by a compound-Poisson process of jumps with
//! magnitude above a cutoff ε, with the removed small-jump compensation
//! −∫_{ε<|x|≤1} x ν(dx) folded into the drift.
//!
//! Randomness is counter-based and splittable: every path owns an
//! [`RngStream`] keyed by (seed, path index), with separate substreams for
//! return noise, business noise, and the representation scheme, so the two
//! discounted-integral constructions use independent business randomness
//! over identical return paths, and any subset of paths can be simulated in
//! any order with bit-identical results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use crate::jumps::{JumpFamily, SizeSampler, TemperedSideSampler};
use crate::model::{BusinessSpec, ExperimentSpec, GridSpec, ReturnSpec};
use crate::numerics::{NumericsError, PiecewiseLinear};

/// Errors from path simulation.
#[derive(Debug, thiserror::Error)]
pub enum SimError {
    /// A sampled jump pushed the price multiplier 1 + ΔR to zero or below.
    /// Impossible for validated specs; guards the compound-Poisson cutoff
    /// approximation and unvalidated inputs.
    #[error("jump at t = {time} gives 1 + ΔR = {multiplier} ≤ 0; the price would not stay positive")]
    JumpBelowMinusOne { time: f64, multiplier: f64 },
    /// The model cannot be simulated as configured.
    #[error("not simulatable: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

// ---- Splittable RNG ---------------------------------------------------------------

/// Named substreams of a path's randomness.
///
/// Keeping the three sources on separate keys means the representation
/// scheme can redraw the business noise while reusing the identical return
/// path — exactly what its identity-in-law contract requires.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Substream {
    Returns = 0,
    Business = 1,
    Representation = 2,
}

/// Counter-based splittable random source for one path: a 64-bit root seed
/// and a path index. Each substream derives an independent 256-bit ChaCha
/// key, so streams with distinct (seed, index, substream) are statistically
/// independent and identical triples reproduce bit-identical draws.
#[derive(Debug, Clone, Copy)]
pub struct RngStream {
    seed: u64,
    path_index: u64,
}

/// splitmix64 output function: one decorrelated 64-bit word per call.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, path_index: u64) -> Self {
        Self { seed, path_index }
    }

    pub fn path_index(&self) -> u64 {
        self.path_index
    }

    /// A fresh generator for one substream of this path.
    pub fn substream(&self, sub: Substream) -> ChaCha8Rng {
        // Absorb (seed, path index, substream) through the splitmix64
        // avalanche, then expand to a 256-bit key.
        let mut state = self.seed;
        let _ = splitmix64(&mut state);
        state ^= self.path_index.wrapping_mul(0xd605_bbb5_8c8a_bc2d);
        let _ = splitmix64(&mut state);
        state ^= (sub as u64).wrapping_mul(0xa24b_aed4_963e_e407);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

// ---- Simulated path ----------------------------------------------------------------

/// One simulated path of the return side, with the discounting functionals
/// accumulated on the grid, and optionally the discounted business integral.
///
/// All arrays share the index of `times`; `times[0] = 0` carries the initial
/// values R̂ = 0, ε(R) = 1, I = J(α) = Z = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    /// Strictly increasing grid 0 = t₀ < … < t_m = T, including every
    /// compound-Poisson jump epoch of R when the grid is jump-adapted.
    pub times: Vec<f64>,
    /// R̂_{t_i} = ln ε(R)_{t_i}, accumulated additively (log jumps enter as
    /// ln(1 + ΔR)).
    pub r_hat: Vec<f64>,
    /// ε(R)_{t_i}, accumulated multiplicatively (price jumps enter as the
    /// factor 1 + ΔR). Agrees with exp(r_hat) to ~10⁻¹² relative error; the
    /// two routes are kept separate precisely so that agreement is a
    /// checkable invariant rather than a definition.
    pub stoch_exp: Vec<f64>,
    /// I_{t_i} = ∫₀^{t_i} e^{−R̂_s} ds by the left-point rectangle rule.
    pub i_func: Vec<f64>,
    /// The exponents α for which `j_func` carries J(α); `2.0` is always
    /// present (first) because the time change and the Cauchy–Schwarz
    /// diagnostics need it.
    pub j_alphas: Vec<f64>,
    /// j_func[k][i] = J_{t_i}(j_alphas[k]) = ∫₀^{t_i} e^{−j_alphas[k]·R̂_s} ds,
    /// left-point rule.
    pub j_func: Vec<Vec<f64>>,
    /// Z_{t_i} = Σ_{k≤i} ΔX_{t_k}/ε(R)_{t_{k−1}}; `None` until a business
    /// process has been discounted in.
    pub disc_integral: Option<Vec<f64>>,
}

impl SimulatedPath {
    /// J(α) values for one of the requested exponents (exact match).
    pub fn j_at(&self, alpha: f64) -> Option<&[f64]> {
        self.j_alphas
            .iter()
            .position(|&a| a == alpha)
            .map(|k| self.j_func[k].as_slice())
    }

    /// Terminal I_T.
    pub fn i_t(&self) -> f64 {
        *self.i_func.last().expect("path has at least the origin node")
    }

    /// Terminal J_T(α), if α was requested.
    pub fn j_t(&self, alpha: f64) -> Option<f64> {
        self.j_at(alpha).map(|v| *v.last().expect("nonempty"))
    }

    /// Largest shortfall sup_{t_i} (−Z_{t_i}); ruin at capital y means this
    /// exceeds y. Panics if the discounted integral has not been filled in.
    pub fn max_shortfall(&self) -> f64 {
        let z = self
            .disc_integral
            .as_ref()
            .expect("disc_integral not filled; run discounted_integral_direct first");
        z.iter().fold(0.0f64, |m, &v| m.max(-v))
    }
}

// ---- Prepared engines ---------------------------------------------------------------

/// How a raw jump draw maps into the return process.
enum JumpMap {
    /// Draw is ΔR (price level); R̂ gains ln(1 + ΔR).
    Price,
    /// Draw is ΔR̂ (log level); the price factor is e^{ΔR̂}.
    Log,
    /// Draw is ΔL of the additive driver; the return jump is g(t)·ΔL.
    Scaled,
}

/// Draws one raw jump value.
enum JumpDraw {
    Sized(SizeSampler),
    /// Two tempered sides: negative with probability `p_neg`, magnitudes
    /// from the per-side cutoff samplers.
    TwoSided {
        neg: TemperedSideSampler,
        pos: TemperedSideSampler,
        p_neg: f64,
    },
}

impl JumpDraw {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            JumpDraw::Sized(s) => s.sample(rng),
            JumpDraw::TwoSided { neg, pos, p_neg } => {
                let u: f64 = rng.random();
                if u < *p_neg {
                    -neg.sample(rng)
                } else {
                    pos.sample(rng)
                }
            }
        }
    }
}

struct PreparedJumps {
    rate: f64,
    draw: JumpDraw,
}

/// Compound-Poisson jumps of a business process (tempered sides must be
/// finite-activity, which model validation guarantees).
fn prepare_business_jumps(family: &JumpFamily) -> Result<Option<PreparedJumps>, SimError> {
    match family {
        JumpFamily::None => Ok(None),
        JumpFamily::CompoundPoisson { rate, sizes } => Ok(Some(PreparedJumps {
            rate: *rate,
            draw: JumpDraw::Sized(sizes.sampler()),
        })),
        JumpFamily::TemperedStableTails { .. } => {
            if !family.finite_activity() {
                return Err(SimError::Unsupported(
                    "infinite-activity business jumps cannot be simulated exactly".into(),
                ));
            }
            let (n, p) = family.tempered_sides().expect("tempered family");
            // The cutoff argument is unused for finite-activity sides, which
            // sample their whole (Gamma) law.
            let neg = TemperedSideSampler::new(n, 0.5)?;
            let pos = TemperedSideSampler::new(p, 0.5)?;
            let rate = neg.rate + pos.rate;
            let p_neg = neg.rate / rate;
            Ok(Some(PreparedJumps {
                rate,
                draw: JumpDraw::TwoSided { neg, pos, p_neg },
            }))
        }
    }
}

/// Deterministic coefficients of the continuous part.
enum Flow {
    /// Time-homogeneous: R̂ gains drift·Δ + σ·ΔW per interval.
    Homogeneous { drift: f64, sigma: f64 },
    /// Additive model: R̂ gains a_pw·∫g − ½σ²∫g² plus a Gaussian of
    /// variance σ²∫g² per interval (exact in distribution).
    Curved {
        curve: PiecewiseLinear,
        a_pw: f64,
        sigma: f64,
    },
}

/// A return model prepared for walking: continuous coefficients, jump
/// process, and the jump-to-return mapping.
struct ReturnEngine {
    flow: Flow,
    jumps: Option<PreparedJumps>,
    map: JumpMap,
}

impl ReturnEngine {
    fn prepare(returns: &ReturnSpec, cutoff_eps: f64) -> Result<Self, SimError> {
        match returns {
            ReturnSpec::BlackScholes { a, sigma } => Ok(Self {
                flow: Flow::Homogeneous { drift: a - 0.5 * sigma * sigma, sigma: *sigma },
                jumps: None,
                map: JumpMap::Price,
            }),
            ReturnSpec::LevyJumpDiffusion { a, sigma, jumps } => {
                let prepared = match jumps {
                    JumpFamily::None => None,
                    JumpFamily::CompoundPoisson { rate, sizes } => Some(PreparedJumps {
                        rate: *rate,
                        draw: JumpDraw::Sized(sizes.sampler()),
                    }),
                    JumpFamily::TemperedStableTails { .. } => {
                        return Err(SimError::Unsupported(
                            "tempered tails describe log-price jumps; place them on the \
                             log-return model"
                                .into(),
                        ));
                    }
                };
                // Semimartingale drift compensates jumps on |x| ≤ 1; the
                // pathwise drift between jumps removes that compensator.
                let compensation = match jumps {
                    JumpFamily::CompoundPoisson { rate, sizes } => rate * sizes.mean_small(),
                    _ => 0.0,
                };
                Ok(Self {
                    flow: Flow::Homogeneous {
                        drift: a - compensation - 0.5 * sigma * sigma,
                        sigma: *sigma,
                    },
                    jumps: prepared,
                    map: JumpMap::Price,
                })
            }
            ReturnSpec::HatJumpDiffusion { a, sigma, jumps } => match jumps {
                JumpFamily::None => Ok(Self {
                    flow: Flow::Homogeneous { drift: *a, sigma: *sigma },
                    jumps: None,
                    map: JumpMap::Log,
                }),
                // Log jumps are uncompensated in this model: the drift is
                // the literal Lebesgue coefficient.
                JumpFamily::CompoundPoisson { rate, sizes } => Ok(Self {
                    flow: Flow::Homogeneous { drift: *a, sigma: *sigma },
                    jumps: Some(PreparedJumps {
                        rate: *rate,
                        draw: JumpDraw::Sized(sizes.sampler()),
                    }),
                    map: JumpMap::Log,
                }),
                JumpFamily::TemperedStableTails { .. } => {
                    if !(cutoff_eps > 0.0 && cutoff_eps < 1.0) {
                        return Err(SimError::Unsupported(format!(
                            "small-jump cutoff must lie in (0, 1), got {cutoff_eps}"
                        )));
                    }
                    let (n, p) = jumps.tempered_sides().expect("tempered family");
                    let neg = TemperedSideSampler::new(n, cutoff_eps)?;
                    let pos = TemperedSideSampler::new(p, cutoff_eps)?;
                    // Tails are compensated on |x| ≤ 1 in this model. Jumps
                    // below the cutoff are dropped, so their compensation
                    // −∫_{ε<|x|≤1} x ν(dx) moves into the drift; for a
                    // finite-activity side every jump is kept and the
                    // compensation runs from 0.
                    let lo = |side: &crate::jumps::TemperedSide| {
                        if side.finite_activity() {
                            0.0
                        } else {
                            cutoff_eps
                        }
                    };
                    let compensation = p.moment(1.0, lo(&p), 1.0)? - n.moment(1.0, lo(&n), 1.0)?;
                    let rate = neg.rate + pos.rate;
                    let p_neg = neg.rate / rate;
                    Ok(Self {
                        flow: Flow::Homogeneous { drift: a - compensation, sigma: *sigma },
                        jumps: Some(PreparedJumps {
                            rate,
                            draw: JumpDraw::TwoSided { neg, pos, p_neg },
                        }),
                        map: JumpMap::Log,
                    })
                }
            },
            ReturnSpec::AdditiveIntegral { g, a, sigma, jumps } => {
                let prepared = match jumps {
                    JumpFamily::None => None,
                    JumpFamily::CompoundPoisson { rate, sizes } => Some(PreparedJumps {
                        rate: *rate,
                        draw: JumpDraw::Sized(sizes.sampler()),
                    }),
                    JumpFamily::TemperedStableTails { .. } => {
                        return Err(SimError::Unsupported(
                            "tempered tails are not supported on the additive driver".into(),
                        ));
                    }
                };
                let compensation = match jumps {
                    JumpFamily::CompoundPoisson { rate, sizes } => rate * sizes.mean_small(),
                    _ => 0.0,
                };
                Ok(Self {
                    flow: Flow::Curved {
                        curve: PiecewiseLinear::new(g.clone())?,
                        a_pw: a - compensation,
                        sigma: *sigma,
                    },
                    jumps: prepared,
                    map: JumpMap::Scaled,
                })
            }
        }
    }

    fn jump_rate(&self) -> f64 {
        self.jumps.as_ref().map_or(0.0, |j| j.rate)
    }

    /// Continuous R̂ increment over (t0, t1] — drift, Itô correction, and an
    /// exact-in-distribution Gaussian (no draw when the diffusion is off).
    fn continuous_increment<R: Rng + ?Sized>(&self, t0: f64, t1: f64, rng: &mut R) -> f64 {
        match &self.flow {
            Flow::Homogeneous { drift, sigma } => {
                let dt = t1 - t0;
                let mut incr = drift * dt;
                if *sigma > 0.0 {
                    let z: f64 = rng.sample(StandardNormal);
                    incr += sigma * dt.sqrt() * z;
                }
                incr
            }
            Flow::Curved { curve, a_pw, sigma } => {
                let int_g = curve.integral(t0, t1);
                let int_g2 = curve.integral_sq(t0, t1);
                let mut incr = a_pw * int_g - 0.5 * sigma * sigma * int_g2;
                if *sigma > 0.0 {
                    let z: f64 = rng.sample(StandardNormal);
                    incr += sigma * int_g2.sqrt() * z;
                }
                incr
            }
        }
    }

    /// Sample and map one jump at `time`: returns (ΔR̂, price factor 1+ΔR).
    fn jump<R: Rng + ?Sized>(&self, time: f64, rng: &mut R) -> Result<(f64, f64), SimError> {
        let raw = self
            .jumps
            .as_ref()
            .expect("jump requested on a jump-free engine")
            .draw
            .draw(rng);
        let delta_r = match (&self.map, &self.flow) {
            (JumpMap::Price, _) => raw,
            (JumpMap::Log, _) => return Ok((raw, raw.exp())),
            (JumpMap::Scaled, Flow::Curved { curve, .. }) => curve.eval(time) * raw,
            (JumpMap::Scaled, _) => unreachable!("scaled jumps imply the curved flow"),
        };
        let multiplier = 1.0 + delta_r;
        if multiplier <= 0.0 {
            return Err(SimError::JumpBelowMinusOne { time, multiplier });
        }
        Ok((multiplier.ln(), multiplier))
    }
}

// ---- Grid construction ---------------------------------------------------------------

/// Poisson jump epochs on (0, t), in increasing order.
fn sample_epochs<R: Rng + ?Sized>(rate: f64, t: f64, rng: &mut R) -> Vec<f64> {
    let mut epochs = Vec::new();
    if rate <= 0.0 {
        return epochs;
    }
    let exp = Exp::new(rate).expect("positive rate");
    let mut s: f64 = exp.sample(rng);
    while s < t {
        epochs.push(s);
        s += exp.sample(rng);
    }
    epochs
}

/// Uniform grid on [0, T] merged (when jump-adapted) with the jump epochs.
fn merged_times(grid: &GridSpec, epochs: &[f64]) -> Vec<f64> {
    let n = grid.n_steps.max(1);
    let uniform = (0..=n).map(|k| grid.t * (k as f64 / n as f64));
    if !grid.jump_adapted || epochs.is_empty() {
        return uniform.collect();
    }
    let mut times = Vec::with_capacity(n + 1 + epochs.len());
    let mut e = epochs.iter().copied().peekable();
    for node in uniform {
        while e.peek().is_some_and(|&x| x < node) {
            times.push(e.next().expect("peeked"));
        }
        // An epoch landing exactly on a node is kept once.
        if e.peek().is_some_and(|&x| x == node) {
            e.next();
        }
        times.push(node);
    }
    times
}

// ---- Return-path simulation ------------------------------------------------------------

/// Simulate one path of the return side on the (jump-adapted) grid:
/// R̂, ε(R), I, and J(α) for every requested exponent (2 is always included).
///
/// R̂ accumulates the continuous drift/diffusion increments plus ln(1 + ΔR)
/// at each jump; ε(R) accumulates the same path multiplicatively. I and J(α)
/// integrate e^{−R̂} and e^{−αR̂} by the left-point rectangle rule, matching
/// the predictable ε(R)_{s−} discounting of the surplus solution.
///
/// Tempered-stable log jumps are simulated above the magnitude cutoff
/// `cutoff_eps` with the removed compensation folded into the drift.
pub fn simulate_return_path(
    returns: &ReturnSpec,
    grid: &GridSpec,
    alphas: &[f64],
    cutoff_eps: f64,
    stream: &RngStream,
) -> Result<SimulatedPath, SimError> {
    let engine = ReturnEngine::prepare(returns, cutoff_eps)?;
    let mut rng = stream.substream(Substream::Returns);
    let epochs = sample_epochs(engine.jump_rate(), grid.t, &mut rng);
    let times = merged_times(grid, &epochs);
    let m = times.len();

    let mut j_alphas = vec![2.0];
    j_alphas.extend(alphas.iter().copied().filter(|&a| a != 2.0));

    let mut r_hat = vec![0.0f64; m];
    let mut stoch_exp = vec![1.0f64; m];
    let mut i_func = vec![0.0f64; m];
    let mut j_func = vec![vec![0.0f64; m]; j_alphas.len()];

    let mut cursor = 0usize;
    for i in 1..m {
        let (t0, t1) = (times[i - 1], times[i]);
        let dt = t1 - t0;
        debug_assert!(dt > 0.0, "grid must be strictly increasing");

        // Left-point quadrature uses the state at t0, before this step.
        let left = r_hat[i - 1];
        i_func[i] = i_func[i - 1] + (-left).exp() * dt;
        for (k, &alpha) in j_alphas.iter().enumerate() {
            j_func[k][i] = j_func[k][i - 1] + (-alpha * left).exp() * dt;
        }

        let cont = engine.continuous_increment(t0, t1, &mut rng);
        let mut log_jumps = 0.0;
        let mut factor = 1.0;
        while cursor < epochs.len() && epochs[cursor] <= t1 {
            debug_assert!(epochs[cursor] > t0);
            let (d_log, d_factor) = engine.jump(epochs[cursor], &mut rng)?;
            log_jumps += d_log;
            factor *= d_factor;
            cursor += 1;
        }

        r_hat[i] = r_hat[i - 1] + cont + log_jumps;
        stoch_exp[i] = stoch_exp[i - 1] * cont.exp() * factor;
        debug_assert!(stoch_exp[i] > 0.0, "stochastic exponential must stay positive");
    }

    Ok(SimulatedPath {
        times,
        r_hat,
        stoch_exp,
        i_func,
        j_alphas,
        j_func,
        disc_integral: None,
    })
}

// ---- Business increments -----------------------------------------------------------------

/// One business jump: its exact epoch, size, the |x| > 1 split used by the
/// representation scheme, and the grid interval (t_{k−1}, t_k] it falls in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BusinessJump {
    pub time: f64,
    pub size: f64,
    /// Whether |size| > 1 (big-jump part of the decomposition).
    pub big: bool,
    /// Index k of the grid interval (times[k−1], times[k]] containing the
    /// epoch.
    pub interval: usize,
}

/// Increments of the business process X on a given grid, with jumps listed
/// separately. `increments[i]` is ΔX over (times[i−1], times[i]] (so
/// `increments[0] = 0`), inclusive of the jumps in that interval.
#[derive(Debug, Clone, PartialEq)]
pub struct BusinessIncrements {
    pub increments: Vec<f64>,
    pub jumps: Vec<BusinessJump>,
}

impl BusinessIncrements {
    /// X_{t_i} as the running sum of increments.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.increments.len());
        let mut acc = 0.0;
        for &d in &self.increments {
            acc += d;
            x.push(acc);
        }
        x
    }
}

/// Simulate the business increments on an already-merged grid: pathwise
/// drift plus exact Gaussian increments plus exact compound-Poisson jumps
/// (tempered business jumps are finite-activity and sampled exactly).
pub fn simulate_business_increments(
    business: &BusinessSpec,
    times: &[f64],
    stream: &RngStream,
) -> Result<BusinessIncrements, SimError> {
    let prepared = prepare_business_jumps(&business.jumps)?;
    let a_pw = business.pathwise_drift()?;
    let sigma = business.sigma;
    let t_end = *times.last().expect("grid has at least the origin");
    let mut rng = stream.substream(Substream::Business);
    let epochs = sample_epochs(prepared.as_ref().map_or(0.0, |p| p.rate), t_end, &mut rng);

    let mut increments = vec![0.0; times.len()];
    let mut jumps = Vec::with_capacity(epochs.len());
    let mut cursor = 0usize;
    for i in 1..times.len() {
        let (t0, t1) = (times[i - 1], times[i]);
        let dt = t1 - t0;
        let mut d = a_pw * dt;
        if sigma > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            d += sigma * dt.sqrt() * z;
        }
        while cursor < epochs.len() && epochs[cursor] <= t1 {
            debug_assert!(epochs[cursor] > t0);
            let size = prepared
                .as_ref()
                .expect("epochs imply prepared jumps")
                .draw
                .draw(&mut rng);
            d += size;
            jumps.push(BusinessJump {
                time: epochs[cursor],
                size,
                big: size.abs() > 1.0,
                interval: i,
            });
            cursor += 1;
        }
        increments[i] = d;
    }
    Ok(BusinessIncrements { increments, jumps })
}

// ---- Discounted integral: direct scheme -----------------------------------------------------

/// Fill in Z_{t_i} = Σ_{k≤i} ΔX_{t_k}/ε(R)_{t_{k−1}}: every increment —
/// jumps included — is discounted by the stochastic exponential just before
/// its interval, the predictable left-limit rule of the surplus solution.
pub fn discounted_integral_direct(path: &mut SimulatedPath, x: &BusinessIncrements) {
    assert_eq!(
        x.increments.len(),
        path.times.len(),
        "business increments must live on the path's grid"
    );
    let mut z = vec![0.0; path.times.len()];
    for i in 1..z.len() {
        z[i] = z[i - 1] + x.increments[i] / path.stoch_exp[i - 1];
    }
    path.disc_integral = Some(z);
}

// ---- Discounted integral: representation scheme ----------------------------------------------

/// The discounted integral assembled from its identity-in-law decomposition
/// a_X·I_t + σ_X·W_{J_t} + M^d_t + U_t, with fresh business randomness:
/// a Brownian motion evaluated at the time change J_t (sampled as Gaussian
/// increments of variance ΔJ_t, exact in distribution given ε(R)), a
/// compensated small-jump integral, and a raw big-jump integral.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationPath {
    pub times: Vec<f64>,
    /// a_X·I_t (semimartingale drift times the discounting integral).
    pub a_term: Vec<f64>,
    /// σ_X·W_{J_t}.
    pub w_term: Vec<f64>,
    /// M^d_t: discounted small jumps (|x| ≤ 1) minus their compensator.
    pub m_term: Vec<f64>,
    /// U_t: discounted big jumps (|x| > 1), uncompensated.
    pub u_term: Vec<f64>,
}

impl RepresentationPath {
    /// The reassembled discounted integral at node i.
    pub fn total(&self, i: usize) -> f64 {
        self.a_term[i] + self.w_term[i] + self.m_term[i] + self.u_term[i]
    }

    /// All nodes of the reassembled discounted integral.
    pub fn totals(&self) -> Vec<f64> {
        (0..self.times.len()).map(|i| self.total(i)).collect()
    }
}

/// Build the representation-scheme discounted integral over an existing
/// return path. Business noise comes from the representation substream, so
/// ε(R) is shared with the direct scheme while X's randomness is
/// independent — the two schemes then agree in law, not pathwise.
pub fn discounted_integral_representation(
    business: &BusinessSpec,
    path: &SimulatedPath,
    stream: &RngStream,
) -> Result<RepresentationPath, SimError> {
    let prepared = prepare_business_jumps(&business.jumps)?;
    // Compensator density of the small-jump part: ∫_{|x|≤1} x ν(dx).
    let nu_small_mean = match &business.jumps {
        JumpFamily::None => 0.0,
        _ => business.jumps.nu_mean_small()?,
    };
    let j2 = path.j_at(2.0).expect("J(2) is always simulated");
    let times = &path.times;
    let t_end = *times.last().expect("nonempty grid");
    let mut rng = stream.substream(Substream::Representation);
    let epochs = sample_epochs(prepared.as_ref().map_or(0.0, |p| p.rate), t_end, &mut rng);

    let m = times.len();
    let mut w_term = vec![0.0; m];
    let mut m_term = vec![0.0; m];
    let mut u_term = vec![0.0; m];
    let mut cursor = 0usize;
    let (mut small_sum, mut big_sum) = (0.0f64, 0.0f64);
    for i in 1..m {
        // Brownian motion at the time change J_t: increment variance
        // σ²·(J_{t_i} − J_{t_{i−1}}).
        w_term[i] = w_term[i - 1];
        if business.sigma > 0.0 {
            let dj = (j2[i] - j2[i - 1]).max(0.0);
            let z: f64 = rng.sample(StandardNormal);
            w_term[i] += business.sigma * dj.sqrt() * z;
        }
        while cursor < epochs.len() && epochs[cursor] <= times[i] {
            let size = prepared
                .as_ref()
                .expect("epochs imply prepared jumps")
                .draw
                .draw(&mut rng);
            // Discount by ε(R) just before the jump's interval.
            let discounted = size / path.stoch_exp[i - 1];
            if size.abs() > 1.0 {
                big_sum += discounted;
            } else {
                small_sum += discounted;
            }
            cursor += 1;
        }
        m_term[i] = small_sum - nu_small_mean * path.i_func[i];
        u_term[i] = big_sum;
    }
    let a_term = path.i_func.iter().map(|&v| business.drift * v).collect();
    Ok(RepresentationPath {
        times: times.clone(),
        a_term,
        w_term,
        m_term,
        u_term,
    })
}

// ---- Ruin detection --------------------------------------------------------------------------

/// First grid epoch with Z_{t_i} < −y, if any. Monitoring is discrete:
/// crossings between grid nodes are not seen, which biases ruin
/// probabilities downward (probe with a refined grid to quantify).
pub fn detect_ruin(path: &SimulatedPath, y: f64) -> Option<f64> {
    debug_assert!(y > 0.0, "initial capital must be positive");
    let z = path
        .disc_integral
        .as_ref()
        .expect("disc_integral not filled; run discounted_integral_direct first");
    z.iter().position(|&v| v < -y).map(|i| path.times[i])
}

// ---- One-stop path construction ---------------------------------------------------------------

/// Simulate the full surplus machinery for one path of an experiment:
/// return path, business increments, and the direct discounted integral.
pub fn simulate_surplus_path(
    spec: &ExperimentSpec,
    path_index: u64,
) -> Result<SimulatedPath, SimError> {
    let stream = RngStream::new(spec.mc.seed, path_index);
    let mut path = simulate_return_path(
        &spec.returns,
        &spec.grid,
        &spec.alphas,
        spec.cutoff_eps,
        &stream,
    )?;
    let x = simulate_business_increments(&spec.business, &path.times, &stream)?;
    discounted_integral_direct(&mut path, &x);
    Ok(path)
}

// ---- Tests -----------------------------------------------------------------------------------
