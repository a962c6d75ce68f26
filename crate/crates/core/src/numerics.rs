//! Shared numerical utilities: compensated summation, adaptive quadrature,
//! piecewise-linear tables, and the two-sample Kolmogorov-Smirnov distance.
//!
//! Everything here is deterministic pure math; no RNG state is touched.

use thiserror::Error;

/// z-quantile for two-sided 95% intervals (Φ⁻¹(0.975)).
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Error, PartialEq)]
pub enum NumericsError {
    /// Adaptive quadrature hit its subdivision cap before reaching tolerance.
    #[error("quadrature failure over [{a}, {b}]: requested tol {tol:e} not reached")]
    QuadratureFailure { a: f64, b: f64, tol: f64 },
    /// A piecewise-linear table was malformed (unsorted, empty, non-finite).
    #[error("invalid piecewise-linear table: {0}")]
    BadTable(String),
}

// ---- Compensated summation -------------------------------------------------

/// Neumaier-compensated accumulator.
///
/// Used for every cross-path reduction so aggregate statistics do not depend
/// on how work was scheduled: per-path values are collected in path order and
/// folded sequentially through one of these.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of a slice in slice order.
pub fn kahan_sum(xs: &[f64]) -> f64 {
    let mut acc = Kahan::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Sample mean and standard error of the mean (compensated).
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = kahan_sum(xs) / n;
    let mut ss = Kahan::new();
    for &x in xs {
        let d = x - mean;
        ss.add(d * d);
    }
    let var = ss.value() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

// ---- Adaptive quadrature ----------------------------------------------------

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance
/// `tol`, with Richardson extrapolation at each acceptance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, NumericsError> {
    const MAX_DEPTH: u32 = 52;
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut out = 0.0;
    let mut converged = true;
    simpson_rec(
        &f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut out, &mut converged,
    );
    if converged {
        Ok(out)
    } else {
        Err(NumericsError::QuadratureFailure { a, b, tol })
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    out: &mut f64,
    converged: &mut bool,
) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // 15 = 2^4 − 1 from the Richardson error estimate for Simpson's rule.
    if delta.abs() <= 15.0 * tol || !delta.is_finite() {
        if !delta.is_finite() {
            *converged = false;
        }
        *out += left + right + delta / 15.0;
        return;
    }
    if depth == 0 {
        *converged = false;
        *out += left + right;
        return;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out, converged);
    simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out, converged);
}

/// ∫ c·x^(q−1−α)·e^(−θx) dx over `(lo, hi)`, the workhorse behind every
/// tempered-tail integral (mass, moments, exponential moments).
///
/// Evaluated after the substitution x = e^u, which removes the power-law
/// endpoint singularity at 0 and turns the slowly decaying tail into an
/// exponentially decaying one. `hi = f64::INFINITY` is allowed when θ > 0 or
/// q − α < 0; the integrand beyond the internal cut is below 1e−22 of scale.
pub fn power_exp_integral(
    c: f64,
    alpha: f64,
    theta: f64,
    q: f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64, NumericsError> {
    debug_assert!(theta >= 0.0 && lo >= 0.0 && hi > lo);
    let p = q - alpha; // integrand in u: c·e^(p·u)·e^(−θ·e^u)
    let g = |u: f64| c * (p * u - theta * u.exp()).exp();
    // Lower endpoint: x → 0 needs p > 0 for convergence; pick u_min so the
    // integrand has decayed below ~1e−20 of its value at x = 1.
    let u_lo = if lo > 0.0 {
        lo.ln()
    } else {
        debug_assert!(p > 0.0, "divergent power_exp_integral at 0 (q <= alpha)");
        -46.0 / p
    };
    // Upper endpoint: decay is driven by θ·e^u (θ > 0) or by p < 0.
    let u_hi = if hi.is_finite() {
        hi.ln()
    } else if theta > 0.0 {
        (46.0 / theta).max(1.0).ln() + 1.0
    } else {
        debug_assert!(p < 0.0, "divergent power_exp_integral tail (theta = 0, q >= alpha)");
        46.0 / -p
    };
    if u_hi <= u_lo {
        return Ok(0.0);
    }
    adaptive_simpson(g, u_lo, u_hi, tol)
}

// ---- Piecewise-linear tables -------------------------------------------------

/// Piecewise-linear function given by strictly increasing knots.
///
/// Queries beyond the last knot extend the final value as a constant (the
/// documented tail extension for additive-model leverage functions); queries
/// before the first knot extend the first value likewise.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PiecewiseLinear {
    /// `(s, value)` knots, strictly increasing in `s`.
    pub knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self, NumericsError> {
        if knots.is_empty() {
            return Err(NumericsError::BadTable("no knots".into()));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(NumericsError::BadTable(format!(
                    "knot abscissae must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if knots.iter().any(|k| !k.0.is_finite() || !k.1.is_finite()) {
            return Err(NumericsError::BadTable("non-finite knot".into()));
        }
        Ok(Self { knots })
    }

    pub fn first_s(&self) -> f64 {
        self.knots[0].0
    }

    pub fn last_s(&self) -> f64 {
        self.knots[self.knots.len() - 1].0
    }

    /// Value at the right end, used as the constant tail extension.
    pub fn tail_value(&self) -> f64 {
        self.knots[self.knots.len() - 1].1
    }

    pub fn eval(&self, s: f64) -> f64 {
        let k = &self.knots;
        if s <= k[0].0 {
            return k[0].1;
        }
        if s >= k[k.len() - 1].0 {
            return k[k.len() - 1].1;
        }
        // Binary search for the segment containing s.
        let idx = k.partition_point(|&(x, _)| x <= s);
        let (x0, y0) = k[idx - 1];
        let (x1, y1) = k[idx];
        y0 + (y1 - y0) * (s - x0) / (x1 - x0)
    }

    /// Exact ∫ g(s) ds over `[a, b]` (trapezoid per segment is exact for a
    /// piecewise-linear integrand).
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.integral_of(a, b, |y| y)
    }

    /// Exact ∫ g(s)² ds over `[a, b]` (Simpson per segment is exact for the
    /// piecewise-quadratic integrand).
    pub fn integral_sq(&self, a: f64, b: f64) -> f64 {
        self.integral_of(a, b, |y| y * y)
    }

    fn integral_of(&self, a: f64, b: f64, h: impl Fn(f64) -> f64) -> f64 {
        debug_assert!(b >= a);
        // Break [a, b] at interior knots, then integrate each linear piece.
        let mut cuts = vec![a];
        for &(x, _) in &self.knots {
            if x > a && x < b {
                cuts.push(x);
            }
        }
        cuts.push(b);
        let mut acc = 0.0;
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let (ya, ym, yb) = (
                h(self.eval(lo)),
                h(self.eval(0.5 * (lo + hi))),
                h(self.eval(hi)),
            );
            acc += (hi - lo) / 6.0 * (ya + 4.0 * ym + yb);
        }
        acc
    }

    /// Minimum and maximum of g over `[a, b]` (attained at knots or endpoints).
    pub fn range_on(&self, a: f64, b: f64) -> (f64, f64) {
        let mut lo = self.eval(a).min(self.eval(b));
        let mut hi = self.eval(a).max(self.eval(b));
        for &(x, y) in &self.knots {
            if x >= a && x <= b {
                lo = lo.min(y);
                hi = hi.max(y);
            }
        }
        (lo, hi)
    }
}

// ---- Two-sample Kolmogorov-Smirnov -------------------------------------------

/// Two-sample KS distance sup_x |F̂₁(x) − F̂₂(x)|. Inputs need not be sorted.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a: Vec<f64> = a.to_vec();
    let mut b: Vec<f64> = b.to_vec();
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    while i < a.len() && j < b.len() {
        // Advance both ECDFs past the next observation value so ties are
        // consumed together before the gap is measured.
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value at level `alpha`:
/// c(α)·√((n+m)/(n·m)) with c(α) = √(−ln(α/2)/2).
pub fn ks_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * (((n + m) as f64) / ((n * m) as f64)).sqrt()
}

// ---- Tests -------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // ── Compensated summation ────────────────────────────────────────────

    #[test]
    fn kahan_recovers_cancellation_naive_sum_loses() {
        // 1 + 1e-16 repeated: naive f64 summation drops every small term.
        let mut xs = vec![1.0f64];
        xs.extend(std::iter::repeat(1e-16).take(10_000));
        let naive: f64 = xs.iter().sum();
        let comp = kahan_sum(&xs);
        assert_eq!(naive, 1.0, "naive sum should exhibit the failure mode");
        assert_relative_eq!(comp, 1.0 + 1e-12, max_relative = 1e-12);
    }

    #[test]
    fn kahan_order_independence_on_shuffled_data() {
        let forward: Vec<f64> = (0..50_000).map(|i| ((i * 2654435761u64 as usize) as f64).sin() * 1e8_f64.powf((i % 7) as f64 / 6.0)).collect();
        let mut reversed = forward.clone();
        reversed.reverse();
        // Compensation keeps the two orderings within one ulp of each other.
        let a = kahan_sum(&forward);
        let b = kahan_sum(&reversed);
        assert_relative_eq!(a, b, max_relative = 1e-14);
    }

    // ── Quadrature ───────────────────────────────────────────────────────

    #[test]
    fn simpson_matches_closed_forms() {
        let i = adaptive_simpson(|x| x.exp(), 0.0, 1.0, 1e-12).unwrap();
        assert_relative_eq!(i, std::f64::consts::E - 1.0, epsilon = 1e-11);
        let j = adaptive_simpson(|x| (1.0 + x * x).recip(), 0.0, 1.0, 1e-12).unwrap();
        assert_relative_eq!(j, std::f64::consts::FRAC_PI_4, epsilon = 1e-11);
    }

    #[test]
    fn power_exp_integral_matches_gamma_function() {
        // ∫₀^∞ x^(3/2)·e^(−2x) dx = Γ(5/2)/2^(5/2), via q−α = 5/2.
        let v = power_exp_integral(1.0, 0.5, 2.0, 3.0, 0.0, f64::INFINITY, 1e-13).unwrap();
        let expect = statrs::function::gamma::gamma(2.5) / 2.0f64.powf(2.5);
        assert_relative_eq!(v, expect, epsilon = 1e-11);
    }

    #[test]
    fn power_exp_integral_handles_zero_theta_tail() {
        // ∫₁^∞ x^(−1−α) dx = 1/α with θ = 0 (q = 0).
        let v = power_exp_integral(1.0, 0.5, 0.0, 0.0, 1.0, f64::INFINITY, 1e-13).unwrap();
        assert_relative_eq!(v, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn power_exp_integral_endpoint_singularity() {
        // ∫₀¹ x^(−1/2) dx = 2 via q − 1 − α = −1/2: integrable singularity.
        let v = power_exp_integral(1.0, 0.5, 0.0, 1.0, 0.0, 1.0, 1e-13).unwrap();
        assert_relative_eq!(v, 2.0, epsilon = 1e-10);
    }

    // ── Piecewise linear ─────────────────────────────────────────────────

    #[test]
    fn piecewise_linear_eval_and_exact_integrals() {
        let g = PiecewiseLinear::new(vec![(0.0, 1.0), (1.0, 3.0), (2.0, 3.0)]).unwrap();
        assert_eq!(g.eval(0.5), 2.0);
        assert_eq!(g.eval(5.0), 3.0, "constant tail extension");
        assert_eq!(g.eval(-1.0), 1.0, "constant head extension");
        // ∫₀² g = (1+3)/2 + 3 = 5;  ∫₀² g² = ∫₀¹(1+2s)² + 9 = 13/3 + 9.
        assert_relative_eq!(g.integral(0.0, 2.0), 5.0, epsilon = 1e-12);
        assert_relative_eq!(g.integral_sq(0.0, 2.0), 13.0 / 3.0 + 9.0, epsilon = 1e-12);
        // Partial span crossing a knot.
        assert_relative_eq!(g.integral(0.5, 1.5), (2.0 + 3.0) / 2.0 * 0.5 + 1.5, epsilon = 1e-12);
    }

    #[test]
    fn piecewise_linear_rejects_bad_tables() {
        assert!(PiecewiseLinear::new(vec![]).is_err());
        assert!(PiecewiseLinear::new(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(PiecewiseLinear::new(vec![(1.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(PiecewiseLinear::new(vec![(0.0, f64::NAN)]).is_err());
    }

    // ── Kolmogorov-Smirnov ───────────────────────────────────────────────

    #[test]
    fn ks_distance_identical_samples_is_zero() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(ks_distance(&xs, &xs), 0.0);
    }

    #[test]
    fn ks_distance_disjoint_samples_is_one() {
        let a: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..50).map(|i| 1000.0 + i as f64).collect();
        assert_eq!(ks_distance(&a, &b), 1.0);
    }

    #[test]
    fn ks_critical_value_at_one_percent() {
        // c(0.01) = √(−ln 0.005 / 2) ≈ 1.62762; equal n = m = 10⁴.
        let crit = ks_critical(10_000, 10_000, 0.01);
        assert_relative_eq!(crit, 1.627_624_044 * (2.0f64 / 10_000.0).sqrt(), epsilon = 1e-6);
    }
}
