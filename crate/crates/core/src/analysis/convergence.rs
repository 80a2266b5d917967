//! Strong-error studies of the Euler–Maruyama scheme against the exact
//! solutions available for a boat with fixed heading.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{closed_form_radial, closed_form_velocity, CartesianState, ModelParams, SampledPath};
use crate::wind::sample_brownian_path;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSetup {
    pub sigma: f64,
    /// Constant rotating-frame velocity.
    pub velocity: (f64, f64),
    pub x0: CartesianState,
    pub t_end: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Reference grid is the smallest studied step divided by this.
    pub refine: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub rms_error: f64,
    pub max_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log(rms_error)` against `log(dt)`.
    pub slope: f64,
    /// Errors strictly decrease as the step shrinks.
    pub monotone: bool,
}

fn steps_for(t_end: f64, dt: f64) -> Result<usize> {
    let n = t_end / dt;
    let k = n.round();
    if k < 1.0 || (n - k).abs() > 1e-6 * k.max(1.0) {
        return Err(Error::param("dt", format!("{dt} does not divide the horizon {t_end}")));
    }
    Ok(k as usize)
}

/// Euler endpoint error for each step size, all driven by the same fine
/// Brownian path per sample, measured against the exact constant-velocity
/// solution evaluated on the fine grid.
pub fn convergence_study(setup: &ConvergenceSetup, dts: &[f64]) -> Result<ConvergenceTable> {
    if dts.is_empty() || setup.n_paths == 0 || setup.refine == 0 {
        return Err(Error::param("dts", "need at least one step, one path and refine >= 1"));
    }
    let dt_min = dts.iter().copied().fold(f64::INFINITY, f64::min);
    let dt_ref = dt_min / setup.refine as f64;
    let n_ref = steps_for(setup.t_end, dt_ref)?;
    let strides: Vec<usize> = dts
        .iter()
        .map(|&dt| {
            let m = dt / dt_ref;
            let k = m.round();
            if (m - k).abs() > 1e-6 * k || n_ref % k as usize != 0 {
                Err(Error::param("dts", format!("{dt} is not a multiple of the reference step")))
            } else {
                Ok(k as usize)
            }
        })
        .collect::<Result<_>>()?;

    let sq_errors: Vec<Vec<f64>> = (0..setup.n_paths as u64)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let path = SampledPath {
                dt: dt_ref,
                values: sample_brownian_path(setup.sigma, setup.seed, i, dt_ref, n_ref),
            };
            let exact = closed_form_velocity(setup.x0, setup.velocity, &path, path.end_time())?;
            Ok(strides
                .iter()
                .zip(dts)
                .map(|(&m, &dt)| {
                    let end = euler_constant_velocity(setup, &path.values, m, dt);
                    (end.x - exact.x).powi(2) + (end.y - exact.y).powi(2)
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let rows: Vec<ConvergenceRow> = dts
        .iter()
        .enumerate()
        .map(|(k, &dt)| {
            let mut errs: Vec<f64> = sq_errors.iter().map(|e| e[k]).collect();
            errs.sort_by(f64::total_cmp);
            let mean = errs.iter().sum::<f64>() / errs.len() as f64;
            ConvergenceRow {
                dt,
                rms_error: mean.sqrt(),
                max_error: errs.last().copied().unwrap_or(0.0).sqrt(),
            }
        })
        .collect();

    let mut by_dt = rows.clone();
    by_dt.sort_by(|a, b| b.dt.total_cmp(&a.dt));
    let monotone = by_dt.windows(2).all(|w| w[1].rms_error < w[0].rms_error);
    Ok(ConvergenceTable {
        slope: loglog_slope(&rows),
        rows,
        monotone,
    })
}

fn euler_constant_velocity(setup: &ConvergenceSetup, fine: &[f64], stride: usize, dt: f64) -> CartesianState {
    let k = -0.5 * setup.sigma * setup.sigma;
    let (vx, vy) = setup.velocity;
    let (mut x, mut y) = (setup.x0.x, setup.x0.y);
    let mut idx = 0;
    while idx + stride < fine.len() {
        let db = fine[idx + stride] - fine[idx];
        let nx = x + (k * x + vx) * dt - y * db;
        let ny = y + (k * y + vy) * dt + x * db;
        x = nx;
        y = ny;
        idx += stride;
    }
    CartesianState::new(x, y)
}

fn loglog_slope(rows: &[ConvergenceRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.rms_error > 0.0)
        .map(|r| (r.dt.ln(), r.rms_error.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialCheck {
    pub steps: usize,
    /// Largest `|r_euler − (‖x0‖ − v t)|` over the grid.
    pub max_radius_error: f64,
    /// Largest distance between the Euler point and the exact position.
    pub max_position_error: f64,
}

/// Polar Euler for a boat heading straight at the target, compared with the
/// exact radial solution at every grid point.
pub fn radial_regime_check(params: &ModelParams, x0: CartesianState, steps: usize, seed: u64) -> Result<RadialCheck> {
    params.validate()?;
    let r0 = x0.norm();
    if !(r0 > params.eta) || steps == 0 {
        return Err(Error::param("x0", "start must lie outside the target with steps >= 1"));
    }
    let dt = (r0 - params.eta) / params.v / steps as f64;
    let wind = sample_brownian_path(params.sigma, seed, 0, dt, steps);
    let mut r = r0;
    let mut theta = x0.y.atan2(x0.x);
    let mut out = RadialCheck {
        steps,
        max_radius_error: 0.0,
        max_position_error: 0.0,
    };
    for k in 1..=steps {
        r += -params.v * dt;
        theta += wind[k] - wind[k - 1];
        let t = (k as f64 * dt).min((r0 - params.eta) / params.v);
        let exact = closed_form_radial(x0, params, wind[k], t)?;
        out.max_radius_error = out.max_radius_error.max((r - (r0 - params.v * t)).abs());
        let (s, c) = theta.sin_cos();
        out.max_position_error = out
            .max_position_error
            .max((r * c - exact.x).hypot(r * s - exact.y));
    }
    Ok(out)
}
