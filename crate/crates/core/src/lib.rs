//! Ruin probabilities for an insurer whose surplus is continuously invested
//! in a risky asset.
//!
//! The surplus with initial capital `y` evolves as the stochastic exponential
//! of the return process applied to `y` plus the discounted business flow;
//! ruin is the first time the discounted flow drops below `−y`. This crate
//! provides, on top of a shared model vocabulary ([`model`]):
//!
//! - [`analytics`] — the Laplace exponent ψ of the log-return transform, the
//!   positive root β∞, finite-horizon moment classifiers, and certain-ruin
//!   verdicts for the drift-dominated regime;
//! - [`simulate`] — deterministic-seed path simulation of the return
//!   transform, its exponential functionals `I_T` and `J_T(α)`, the business
//!   flow, and the discounted integral (direct and representation forms);
//! - [`estimate`] — Monte Carlo ruin probabilities with Wilson intervals,
//!   common-random-number monotonicity, and log-log tail-slope fits;
//! - [`bounds`] — explicit-constant upper bounds `(C₁·E I_T^α + C₂·E
//!   J_T^{α/2} + C₃·E J_T(α)) / y^α` with closed-form or Monte Carlo
//!   moments, at finite and infinite horizons;
//! - [`io`] — content-addressed run directories: a JSON manifest plus
//!   byte-stable CSV tables that round-trip losslessly;
//! - [`jumps`] and [`numerics`] — jump-measure primitives (samplers and
//!   ν-integrals) and small numeric utilities shared by the rest.
//!
//! Everything downstream of a seed is reproducible: path `k` of a run is a
//! pure function of `(seed, k)`, so runs parallelize, split, and merge
//! without changing a single bit of output.

pub mod analytics;
pub mod bounds;
pub mod estimate;
pub mod io;
pub mod jumps;
pub mod model;
pub mod numerics;
pub mod simulate;
