//! Statistical self-checks: payoff symmetries and the martingale diagnostic.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::montecarlo::{estimate_from_results, run_batch, summarize, McEstimate};
use crate::dynamics::{wrap_angle, ModelParams, PolarState, Tack};
use crate::engine::{run_path, Representation, SimConfig};
use crate::strategies::StrategyKind;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairComparison {
    pub difference: f64,
    pub combined_stderr: f64,
    pub pass: bool,
}

impl PairComparison {
    fn new(a: &McEstimate, b: &McEstimate) -> Self {
        let difference = a.mean - b.mean;
        let combined_stderr = a.stderr.hypot(b.stderr);
        PairComparison {
            difference,
            combined_stderr,
            pass: difference.abs() <= 3.0 * combined_stderr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub base: McEstimate,
    /// Start `(r, π/2 − θ)` on port, simulated with physical tacks.
    pub tack_mirror: McEstimate,
    /// Start `(r, 3π/2 − θ)` on starboard.
    pub layline_mirror: McEstimate,
    pub tack_pair: PairComparison,
    pub layline_pair: PairComparison,
}

impl SymmetryReport {
    pub fn pass(&self) -> bool {
        self.tack_pair.pass && self.layline_pair.pass
    }
}

fn impulse_config(config: &SimConfig) -> Result<()> {
    match config.strategy {
        StrategyKind::ImpulseA { .. } => Ok(()),
        StrategyKind::FeedbackAStar => Err(Error::param("strategy", "symmetry checks need the impulse strategy")),
    }
}

/// Compares the payoff at `(r, θ, +1)` with its two mirror images, each
/// estimated on independent wind seeds (`seed`, `seed + 1`, `seed + 2`).
pub fn symmetry_check(config: &SimConfig, r: f64, theta: f64, n_paths: usize) -> Result<SymmetryReport> {
    impulse_config(config)?;
    let base = estimate_from_results(&run_batch(
        config,
        (PolarState::new(r, theta), Tack::Starboard),
        n_paths,
    )?)?;

    let mut port = config.clone();
    port.seed = config.seed.wrapping_add(1);
    port.representation = Representation::Physical;
    let tack_mirror = estimate_from_results(&run_batch(
        &port,
        (PolarState::new(r, FRAC_PI_2 - theta), Tack::Port),
        n_paths,
    )?)?;

    let mut other = config.clone();
    other.seed = config.seed.wrapping_add(2);
    let layline_mirror = estimate_from_results(&run_batch(
        &other,
        (PolarState::new(r, 3.0 * FRAC_PI_2 - theta), Tack::Starboard),
        n_paths,
    )?)?;

    Ok(SymmetryReport {
        tack_pair: PairComparison::new(&base, &tack_mirror),
        layline_pair: PairComparison::new(&base, &layline_mirror),
        base,
        tack_mirror,
        layline_mirror,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub n: usize,
    pub max_gap: f64,
    /// Paths whose payoffs differ by more than `1e-6`.
    pub mismatches: usize,
}

/// Runs each path next to its mirror image driven by the negated wind.
/// Both mirrors reverse orientation, so the coupled payoffs agree path by
/// path up to rounding; rare mismatches come from rounding at region edges.
pub fn coupled_mirror_check(config: &SimConfig, r: f64, theta: f64, n_paths: usize, layline: bool) -> Result<CouplingReport> {
    impulse_config(config)?;
    let mut mirror = config.clone();
    mirror.mirror_wind = !config.mirror_wind;
    let start = (PolarState::new(r, theta), Tack::Starboard);
    let mirror_start = if layline {
        (PolarState::new(r, 3.0 * FRAC_PI_2 - theta), Tack::Starboard)
    } else {
        mirror.representation = Representation::Physical;
        (PolarState::new(r, FRAC_PI_2 - theta), Tack::Port)
    };
    let gaps: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let (a, _) = run_path(config, start, i)?;
            let (b, _) = run_path(&mirror, mirror_start, i)?;
            Ok((a.payoff - b.payoff).abs())
        })
        .collect::<Result<_>>()?;
    Ok(CouplingReport {
        n: n_paths,
        max_gap: gaps.iter().copied().fold(0.0, f64::max),
        mismatches: gaps.iter().filter(|g| **g > 1e-6).count(),
    })
}

/// Layout of the value grid used by the martingale diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_max: f64,
    /// Radial cells between `eta` and `r_max`.
    pub n_r: usize,
    /// Angular nodes over one period `π`.
    pub n_theta: usize,
    pub paths_per_node: usize,
}

impl GridSpec {
    /// Heuristic resolution floor below which results are flagged.
    pub fn is_coarse(&self) -> bool {
        self.n_r < 8 || self.n_theta < 8 || self.paths_per_node < 50
    }
}

/// Monte Carlo estimate of the feedback-strategy value on a polar grid,
/// bilinear in `(r, θ)` and `π`-periodic in `θ`, zero on the target circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueGrid {
    pub eta: f64,
    pub spec: GridSpec,
    /// Row-major `[i_r][j_theta]`, `i_r = 0..=n_r`.
    pub values: Vec<f64>,
}

impl ValueGrid {
    fn node_theta(spec: &GridSpec, j: usize) -> f64 {
        FRAC_PI_4 + PI * j as f64 / spec.n_theta as f64
    }

    fn node_r(&self, i: usize) -> f64 {
        self.eta + (self.spec.r_max - self.eta) * i as f64 / self.spec.n_r as f64
    }

    pub fn value(&self, r: f64, theta: f64) -> f64 {
        let s = &self.spec;
        let h = (s.r_max - self.eta) / s.n_r as f64;
        let x = ((r - self.eta) / h).clamp(0.0, s.n_r as f64);
        let i0 = (x.floor() as usize).min(s.n_r - 1);
        let fx = x - i0 as f64;
        let u = (theta - FRAC_PI_4).rem_euclid(PI) / PI * s.n_theta as f64;
        let j0 = (u.floor() as usize).min(s.n_theta - 1);
        let fu = u - j0 as f64;
        let j1 = (j0 + 1) % s.n_theta;
        let at = |i: usize, j: usize| self.values[i * s.n_theta + j];
        let lo = at(i0, j0) * (1.0 - fu) + at(i0, j1) * fu;
        let hi = at(i0 + 1, j0) * (1.0 - fu) + at(i0 + 1, j1) * fu;
        lo * (1.0 - fx) + hi * fx
    }
}

/// Builds the value grid from feedback-strategy runs at every node.
pub fn build_value_grid(params: &ModelParams, spec: GridSpec, dt: f64, seed: u64) -> Result<ValueGrid> {
    if !(params.eta > 0.0) {
        return Err(Error::param("eta", "the martingale diagnostic needs eta > 0"));
    }
    if spec.n_r == 0 || spec.n_theta == 0 || !(spec.r_max > params.eta) || spec.paths_per_node < 2 {
        return Err(Error::param("grid", "needs n_r, n_theta >= 1, r_max > eta and >= 2 paths per node"));
    }
    let mut cfg = SimConfig::new(*params, StrategyKind::FeedbackAStar, dt);
    let mut grid = ValueGrid {
        eta: params.eta,
        spec,
        values: vec![0.0; (spec.n_r + 1) * spec.n_theta],
    };
    for i in 1..=spec.n_r {
        for j in 0..spec.n_theta {
            cfg.seed = seed.wrapping_add((i * spec.n_theta + j) as u64);
            let start = (PolarState::new(grid.node_r(i), ValueGrid::node_theta(&spec, j)), Tack::Starboard);
            let est = estimate_from_results(&run_batch(&cfg, start, spec.paths_per_node)?)?;
            grid.values[i * spec.n_theta + j] = est.mean;
        }
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub strategy: String,
    pub mean_drift: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub n: usize,
    pub pass: bool,
    pub coarse_grid: bool,
}

/// Estimates `E[N(Δ∧τ) − N(0)]` for `N(t) = t + V(R_t, Θ_t)` along fresh
/// paths from the given starts (cycled over the path index).
pub fn martingale_drift(
    value: &(dyn Fn(f64, f64) -> f64 + Sync),
    config: &SimConfig,
    starts: &[(PolarState, Tack)],
    n_paths: usize,
    delta: f64,
) -> Result<McEstimate> {
    if starts.is_empty() {
        return Err(Error::param("starts", "need at least one start"));
    }
    let mut cfg = config.clone();
    cfg.horizon = Some(delta);
    cfg.record_trajectory = false;
    let incs: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let start = starts[i as usize % starts.len()];
            let (res, _) = run_path(&cfg, start, i)?;
            let v_end = if res.hit() {
                0.0
            } else {
                value(res.final_state.r, res.final_state.theta)
            };
            Ok(res.tau + v_end - value(start.0.r, start.0.theta))
        })
        .collect::<Result<_>>()?;
    summarize(&incs, 0)
}

/// Full diagnostic: value grid under the feedback strategy, then drift along
/// fresh feedback paths (expected zero) and impulse paths (expected `>= 0`).
pub fn martingale_diagnostic(
    params: &ModelParams,
    spec: GridSpec,
    alpha: f64,
    n_paths: usize,
    delta: f64,
    dt: f64,
    seed: u64,
) -> Result<(DriftReport, DriftReport)> {
    let grid = build_value_grid(params, spec, dt, seed)?;
    let value = |r: f64, th: f64| grid.value(r, th);
    let lo = params.eta + 0.4 * (spec.r_max - params.eta);
    let hi = params.eta + 0.8 * (spec.r_max - params.eta);
    let starts: Vec<(PolarState, Tack)> = (0..16)
        .map(|k| {
            let r = lo + (hi - lo) * ((k * 5) % 16) as f64 / 15.0;
            let th = wrap_angle(FRAC_PI_4 + 2.0 * PI * k as f64 / 16.0);
            (PolarState::new(r, th), Tack::Starboard)
        })
        .collect();
    let coarse = spec.is_coarse();

    let mut cfg = SimConfig::new(*params, StrategyKind::FeedbackAStar, dt);
    cfg.seed = seed.wrapping_add(1_000_003);
    let a = martingale_drift(&value, &cfg, &starts, n_paths, delta)?;
    let astar = DriftReport {
        strategy: "a-star".into(),
        mean_drift: a.mean,
        stderr: a.stderr,
        ci95: a.ci95,
        n: a.n,
        pass: a.ci95.0 <= 0.0 && 0.0 <= a.ci95.1,
        coarse_grid: coarse,
    };

    let mut cfg = SimConfig::new(*params, StrategyKind::ImpulseA { alpha, r0: spec.r_max }, dt);
    cfg.seed = seed.wrapping_add(2_000_003);
    let b = martingale_drift(&value, &cfg, &starts, n_paths, delta)?;
    let impulse = DriftReport {
        strategy: "impulse-a".into(),
        mean_drift: b.mean,
        stderr: b.stderr,
        ci95: b.ci95,
        n: b.n,
        pass: b.mean >= -3.0 * b.stderr,
        coarse_grid: coarse,
    };
    Ok((astar, impulse))
}
