//! Acceptance sweep: nine desk-scale criteria exercising the whole pipeline
//! end to end. Each criterion is one test that finishes with a single
//! `A<k> PASS — …` line carrying the measured numbers (visible with
//! `--nocapture`, and on any failure the assert message carries the same
//! context). The harness's per-test ok/FAILED verdict is the pass/fail line.

use ruinlab_core::analytics::{
    beta_t_classifier, certain_ruin, find_beta_infinity, laplace_exponent, BetaInfinity, BetaT,
    Certainty, RuinVerdict,
};
use ruinlab_core::bounds::{
    bound_constants, finite_time_bound, j_alpha_closed_form, moments, Horizon, MomentMode,
};
use ruinlab_core::estimate::{certain_ruin_probe, mc_ruin_probability, run_paths, slope_fit};
use ruinlab_core::io::{write_path_csv, write_run, BoundRow, RunManifest};
use ruinlab_core::jumps::{JumpFamily, JumpSizeDist};
use ruinlab_core::model::{BusinessSpec, ExperimentSpec, GridSpec, McSpec, ReturnSpec};
use ruinlab_core::numerics::{ks_critical, ks_distance, mean_and_se};
use ruinlab_core::simulate::{
    discounted_integral_representation, simulate_return_path, simulate_surplus_path, RngStream,
};

fn bs(a: f64, sigma: f64) -> ReturnSpec {
    ReturnSpec::BlackScholes { a, sigma }
}

fn brownian_business(drift: f64, sigma: f64) -> BusinessSpec {
    BusinessSpec { drift, sigma, jumps: JumpFamily::None }
}

/// Tempered-tail log-return model shared by the slope and classifier
/// criteria: ν(dx) = |x|^(−3/2)·e^(−3|x|) dx on x < 0 plus
/// x^(−3/2)·e^(−x) dx on x > 0, no diffusion.
fn tempered_hat() -> ReturnSpec {
    ReturnSpec::HatJumpDiffusion {
        a: 0.0,
        sigma: 0.0,
        jumps: JumpFamily::TemperedStableTails {
            c_neg: 1.0,
            c_pos: 1.0,
            lambda_neg: 3.0,
            lambda_pos: 1.0,
            alpha_neg: 0.5,
            alpha_pos: 0.5,
        },
    }
}

fn experiment(
    business: BusinessSpec,
    returns: ReturnSpec,
    grid: GridSpec,
    n_paths: usize,
    seed: u64,
    capitals: Vec<f64>,
    alphas: Vec<f64>,
) -> ExperimentSpec {
    ExperimentSpec {
        business,
        returns,
        grid,
        mc: McSpec { n_paths, seed },
        capitals,
        alphas,
        novikov: Default::default(),
        probe: None,
        cutoff_eps: 1e-3,
    }
}

#[test]
fn a1_geometric_root_matches_the_closed_form() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
    let mut worst = 0.0f64;
    let mut found = 0;
    while found < 20 {
        let a = rng.random_range(0.02..0.6);
        let sigma = rng.random_range(0.05..0.9);
        let target = 2.0 * a / (sigma * sigma) - 1.0;
        if target <= 1e-3 {
            continue; // no safety loading, no positive root — redraw
        }
        let psi = laplace_exponent(&bs(a, sigma)).unwrap();
        match find_beta_infinity(&psi).unwrap() {
            BetaInfinity::Root { value, .. } => {
                let err = (value - target).abs();
                assert!(
                    err <= 1e-10,
                    "root {value} vs closed form {target} differs by {err:e} at a={a}, sigma={sigma}"
                );
                worst = worst.max(err);
            }
            other => panic!("expected a positive root at a={a}, sigma={sigma}, got {other:?}"),
        }
        found += 1;
    }
    println!("A1 PASS — 20 random geometric models, max |root − (2a/σ² − 1)| = {worst:.2e}");
}

#[test]
fn a2_j_moment_monte_carlo_agrees_with_the_time_integral() {
    let returns = bs(0.3, 0.4);
    let grid = GridSpec { t: 1.0, n_steps: 1000, jump_adapted: true };
    let alphas = [0.5, 1.0, 2.0, 2.75];
    let n = 100_000u64;
    let mut samples: Vec<Vec<f64>> = vec![Vec::with_capacity(n as usize); alphas.len()];
    for k in 0..n {
        let stream = RngStream::new(912, k);
        let path = simulate_return_path(&returns, &grid, &alphas, 1e-3, &stream).unwrap();
        for (slot, &alpha) in samples.iter_mut().zip(&alphas) {
            slot.push(path.j_t(alpha).unwrap());
        }
    }
    let psi = laplace_exponent(&returns).unwrap();
    let mut detail = Vec::new();
    for (slot, &alpha) in samples.iter().zip(&alphas) {
        let (mean, se) = mean_and_se(slot);
        let exact = j_alpha_closed_form(&psi, Horizon::Finite { t: 1.0 }, alpha).unwrap();
        let sigmas = (mean - exact).abs() / se;
        assert!(
            sigmas <= 3.0,
            "E J({alpha}): MC {mean:.6} vs exact {exact:.6} is {sigmas:.2} SE away"
        );
        detail.push(format!("α={alpha}: {sigmas:.2}σ"));
    }
    println!(
        "A2 PASS — E J_T(α) within 3 SE of ∫₀ᵀe^(tψ(α))dt at 10⁵ paths ({})",
        detail.join(", ")
    );
}

#[test]
fn a3_assembled_bound_dominates_the_monte_carlo_at_every_capital() {
    let alpha = 1.5;
    let grid = GridSpec { t: 1.0, n_steps: 64, jump_adapted: true };
    let sp = experiment(
        brownian_business(-0.1, 0.2),
        bs(0.3, 0.4),
        grid,
        1_000_000,
        2601,
        vec![5.0, 10.0, 20.0, 40.0, 80.0],
        vec![alpha],
    );
    let estimates = mc_ruin_probability(&sp).unwrap();
    let constants = bound_constants(&sp.business, alpha, &sp.novikov).unwrap();
    let moms = moments(
        &sp.returns,
        &grid,
        alpha,
        &MomentMode::MonteCarlo { n_paths: 200_000, seed: 77 },
        sp.cutoff_eps,
    )
    .unwrap();
    let beta_t = beta_t_classifier(&sp.returns);
    let mut scaled = Vec::new();
    let mut margins = Vec::new();
    for est in &estimates {
        let b = finite_time_bound(&constants, &moms, &beta_t, est.y).unwrap();
        assert!(
            b >= est.ci_high,
            "bound {b:.3e} sits below the CI roof {:.3e} at y = {}",
            est.ci_high,
            est.y
        );
        margins.push(b / est.ci_high.max(f64::MIN_POSITIVE));
        scaled.push(b * est.y.powf(alpha));
    }
    let (lo, hi) = scaled
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let spread = (hi - lo) / hi.abs();
    assert!(spread <= 1e-12, "bound·y^α varies by {spread:e}; the power law must be exact");
    println!(
        "A3 PASS — bound ≥ CI roof at all five capitals (min ratio {:.1e}); bound·y^1.5 = {:.6} constant to {:.1e}",
        margins.iter().cloned().fold(f64::INFINITY, f64::min),
        hi,
        spread
    );
}

#[test]
fn a4_tempered_tail_slope_sits_near_minus_beta_t() {
    let grid = GridSpec { t: 1.0, n_steps: 64, jump_adapted: true };
    // Two decades of capital, four points per decade.
    let capitals: Vec<f64> = (0..9).map(|i| 10f64.powf(f64::from(i) / 4.0)).collect();
    let sp = experiment(
        brownian_business(-1.0, 1.0),
        tempered_hat(),
        grid,
        1_000_000,
        424_242,
        capitals,
        vec![2.0],
    );
    let estimates = mc_ruin_probability(&sp).unwrap();
    let counts: Vec<usize> = estimates.iter().map(|e| e.n_ruined).collect();
    let fit = slope_fit(&estimates, Some(3.0)).unwrap();
    assert!(
        (fit.slope + 3.0).abs() <= 0.75,
        "slope {:.3} outside ±25% of −3 (counts {counts:?})",
        fit.slope
    );
    println!(
        "A4 PASS — fitted slope {:.3} (±25% band around −3) from {} capitals above the 50-event floor; counts {:?}",
        fit.slope, fit.n_used, counts
    );
}

#[test]
fn a5_drift_dominated_regime_is_certain_ruin_with_a_rising_probe() {
    let grid = GridSpec { t: 1.0, n_steps: 32, jump_adapted: true };
    let sp = experiment(
        brownian_business(-0.05, 0.1),
        bs(0.05, 0.4),
        grid,
        10_000,
        53,
        vec![1.0],
        vec![2.0],
    );
    let report = certain_ruin(&sp).unwrap();
    assert_eq!(
        report.verdict,
        RuinVerdict::CertainRuin,
        "conditions: {:?}",
        report.conditions
    );
    let d = report.drift_limit.expect("the drift limit is computed in this regime");
    assert!((d + 0.03).abs() <= 1e-12, "D = {d}, expected −0.03");
    let probes = certain_ruin_probe(&sp, 1.0, &[10.0, 50.0, 200.0]).unwrap();
    for w in probes.windows(2) {
        assert!(
            w[1].p_hat >= w[0].p_hat,
            "shared seeds must make the probe exactly nondecreasing: {} then {}",
            w[0].p_hat,
            w[1].p_hat
        );
    }
    let p_end = probes.last().unwrap().p_hat;
    assert!(p_end >= 0.95, "p̂(200) = {p_end} < 0.95");
    let ps: Vec<f64> = probes.iter().map(|e| e.p_hat).collect();
    println!("A5 PASS — D = {d:.4} < 0, verdict certain ruin; probe p̂(10, 50, 200) = {ps:?}");
}

#[test]
fn a6_direct_and_representation_schemes_agree_in_law() {
    let n = 10_000u64;
    let grid = GridSpec { t: 1.0, n_steps: 64, jump_adapted: true };
    let business = brownian_business(-0.1, 0.2);
    let sp = experiment(
        business.clone(),
        bs(0.3, 0.4),
        grid,
        n as usize,
        881,
        vec![1.0],
        vec![2.0],
    );
    let direct = run_paths(&sp, 0..n).unwrap();
    let mut rep = Vec::with_capacity(n as usize);
    for k in 0..n {
        // Independent seed so the two samples are independent draws of the
        // same law, as the two-sample test assumes.
        let stream = RngStream::new(882, k);
        let path = simulate_return_path(&sp.returns, &grid, &[2.0], sp.cutoff_eps, &stream).unwrap();
        let z = discounted_integral_representation(&business, &path, &stream).unwrap();
        rep.push(z.totals().iter().fold(0.0f64, |m, &v| m.max(-v)));
    }
    let d = ks_distance(&direct, &rep);
    let crit = ks_critical(direct.len(), rep.len(), 0.01);
    assert!(d < crit, "KS distance {d:.5} ≥ 1% critical value {crit:.5}");
    println!("A6 PASS — sup(−Z) two-sample KS {d:.5} < 1% critical {crit:.5} at 10⁴ paths per scheme");
}

#[test]
fn a7_pathwise_norm_inequalities_never_fail() {
    let grid = GridSpec { t: 1.0, n_steps: 64, jump_adapted: true };
    let models = [
        bs(0.3, 0.4),
        ReturnSpec::LevyJumpDiffusion {
            a: 0.1,
            sigma: 0.3,
            jumps: JumpFamily::CompoundPoisson {
                rate: 1.5,
                sizes: JumpSizeDist::Exponential { rate: 1.0 },
            },
        },
        tempered_hat(),
    ];
    let alphas = [0.5, 1.5, 3.0];
    let t = grid.t;
    let slack = |rhs: f64| rhs + 1e-9 * rhs.abs().max(1.0);
    let mut checks = 0u64;
    for (m_idx, model) in models.iter().enumerate() {
        for k in 0..10_000u64 {
            let stream = RngStream::new(700 + m_idx as u64, k);
            let path = simulate_return_path(model, &grid, &alphas, 1e-3, &stream).unwrap();
            let i = path.i_t();
            let j2 = path.j_t(2.0).unwrap();
            assert!(
                i <= slack(t.sqrt() * j2.sqrt()),
                "Cauchy–Schwarz I ≤ √T·√J broke on model {m_idx}, path {k}: {i} vs {}",
                t.sqrt() * j2.sqrt()
            );
            checks += 1;
            for &alpha in &alphas {
                let ja = path.j_t(alpha).unwrap();
                if alpha <= 2.0 {
                    // J(α) = ∫(e^(−2R̂))^(α/2) ≤ T^(1−α/2)·J(2)^(α/2).
                    let rhs = t.powf(1.0 - alpha / 2.0) * j2.powf(alpha / 2.0);
                    assert!(
                        ja <= slack(rhs),
                        "Hölder J({alpha}) ≤ T^(1−α/2)J^(α/2) broke on model {m_idx}, path {k}: {ja} vs {rhs}"
                    );
                } else {
                    // The reverse direction: J(2) ≤ T^(1−2/α)·J(α)^(2/α).
                    let rhs = t.powf(1.0 - 2.0 / alpha) * ja.powf(2.0 / alpha);
                    assert!(
                        j2 <= slack(rhs),
                        "Hölder J(2) ≤ T^(1−2/α)J(α)^(2/α) broke on model {m_idx}, path {k}: {j2} vs {rhs}"
                    );
                }
                checks += 1;
            }
        }
    }
    println!("A7 PASS — {checks} pathwise inequality checks across 3 models × 10⁴ paths, zero violations");
}

#[test]
fn a8_classifier_table_is_exact() {
    let diffusive = beta_t_classifier(&bs(0.3, 0.4));
    assert!(
        matches!(diffusive, BetaT::Infinite { .. }),
        "diffusive log price must classify as unbounded, got {diffusive:?}"
    );
    match beta_t_classifier(&tempered_hat()) {
        BetaT::Finite { value, certainty: Certainty::Exact, .. } => assert_eq!(value, 3.0),
        other => panic!("tempered tails must classify at the negative tempering rate 3, got {other:?}"),
    }
    let kou = ReturnSpec::HatJumpDiffusion {
        a: 0.05,
        sigma: 0.3,
        jumps: JumpFamily::CompoundPoisson {
            rate: 2.0,
            sizes: JumpSizeDist::DoubleExponential { p: 0.3, rate_pos: 2.0, rate_neg: 4.0 },
        },
    };
    match beta_t_classifier(&kou) {
        BetaT::Finite { value, certainty: Certainty::Exact, .. } => assert_eq!(value, 4.0),
        other => panic!("double-exponential jumps must classify at the negative MGF boundary 4, got {other:?}"),
    }
    println!("A8 PASS — β_T classifier: diffusive → ∞, tempered tails → 3, double-exponential → 4, all exact");
}

#[test]
fn a9_identically_seeded_reruns_are_byte_identical() {
    let alpha = 1.5;
    let grid = GridSpec { t: 1.0, n_steps: 32, jump_adapted: true };
    let make = || {
        let sp = experiment(
            brownian_business(-0.1, 0.2),
            bs(0.3, 0.4),
            grid,
            20_000,
            909,
            vec![2.0, 4.0, 8.0],
            vec![alpha],
        );
        let estimates = mc_ruin_probability(&sp).unwrap();
        let constants = bound_constants(&sp.business, alpha, &sp.novikov).unwrap();
        let moms = moments(
            &sp.returns,
            &grid,
            alpha,
            &MomentMode::MonteCarlo { n_paths: 20_000, seed: 909 },
            sp.cutoff_eps,
        )
        .unwrap();
        let beta_t = beta_t_classifier(&sp.returns);
        let mut manifest = RunManifest::new(sp.clone());
        manifest.bound_rows = estimates
            .iter()
            .map(|e| BoundRow {
                y: e.y,
                alpha,
                bound: finite_time_bound(&constants, &moms, &beta_t, e.y).unwrap(),
                mc_estimate: Some(e.p_hat),
                mc_ci_hi: Some(e.ci_high),
            })
            .collect();
        manifest.estimates = estimates;
        (sp, manifest)
    };
    let (sp, m1) = make();
    let (_, m2) = make();
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    write_run(&m1, dir_a.path()).unwrap();
    write_run(&m2, dir_b.path()).unwrap();
    let mut bytes = 0usize;
    for file in ["estimates.csv", "bounds.csv"] {
        let a = std::fs::read(dir_a.path().join(&m1.run_id).join(file)).unwrap();
        let b = std::fs::read(dir_b.path().join(&m2.run_id).join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identically seeded reruns");
        bytes += a.len();
    }
    // Path dumps replay byte-for-byte as well.
    let p1 = simulate_surplus_path(&sp, 7).unwrap();
    let p2 = simulate_surplus_path(&sp, 7).unwrap();
    let f1 = write_path_csv(&dir_a.path().join(&m1.run_id), 7, &p1).unwrap();
    let f2 = write_path_csv(&dir_b.path().join(&m2.run_id), 7, &p2).unwrap();
    let d1 = std::fs::read(f1).unwrap();
    let d2 = std::fs::read(f2).unwrap();
    assert_eq!(d1, d2, "path dump differs between identically seeded reruns");
    println!(
        "A9 PASS — rerun reproduced {} CSV bytes exactly (tables + one path dump)",
        bytes + d1.len()
    );
}
