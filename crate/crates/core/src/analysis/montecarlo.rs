//! Monte Carlo estimation over independent wind paths.
//!
//! Paths run in parallel on the current rayon pool. Results come back in
//! path-index order, and every statistic is computed from the sorted sample,
//! so the reported digits depend neither on the worker count nor on the
//! order in which paths are presented.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{PolarState, Tack};
use crate::engine::{run_path, RunResult, SimConfig};
use crate::{Error, Result};

/// Batches with a larger timeout fraction fail the health check.
pub const MAX_TIMEOUT_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    /// Number of samples behind the mean (timeouts excluded).
    pub n: usize,
    pub ci95: (f64, f64),
    pub timeouts: usize,
}

impl McEstimate {
    /// Timeouts are rare enough for the mean to be trusted.
    pub fn healthy(&self) -> bool {
        let total = self.n + self.timeouts;
        total > 0 && (self.timeouts as f64) <= MAX_TIMEOUT_FRACTION * total as f64
    }
}

/// Sum with Neumaier compensation.
fn compensated_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean, standard error and 95% interval of a sample. Order-independent.
pub fn summarize(samples: &[f64], timeouts: usize) -> Result<McEstimate> {
    if samples.len() < 2 {
        if samples.is_empty() && timeouts > 0 {
            return Err(Error::AllTimedOut { n: timeouts });
        }
        return Err(Error::param(
            "n_paths",
            format!("need at least 2 completed samples, got {}", samples.len()),
        ));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("non-finite sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mean = compensated_sum(sorted.iter().copied()) / n as f64;
    let mut sq: Vec<f64> = sorted.iter().map(|x| (x - mean) * (x - mean)).collect();
    sq.sort_by(f64::total_cmp);
    let var = compensated_sum(sq.into_iter()) / (n - 1) as f64;
    let stderr = (var / n as f64).sqrt();
    Ok(McEstimate {
        mean,
        stderr,
        n,
        ci95: (mean - 1.96 * stderr, mean + 1.96 * stderr),
        timeouts,
    })
}

/// Runs paths `0..n_paths` of the configuration.
pub fn run_batch(config: &SimConfig, start: (PolarState, Tack), n_paths: usize) -> Result<Vec<RunResult>> {
    config.validate()?;
    (0..n_paths as u64)
        .into_par_iter()
        .map(|i| run_path(config, start, i).map(|(r, _)| r))
        .collect()
}

/// Payoff estimate over the paths that reached the target.
pub fn estimate_from_results(results: &[RunResult]) -> Result<McEstimate> {
    let payoffs: Vec<f64> = results.iter().filter(|r| r.hit()).map(|r| r.payoff).collect();
    summarize(&payoffs, results.len() - payoffs.len())
}

/// Estimate of a per-path statistic over the paths that reached the target.
pub fn estimate_stat(results: &[RunResult], f: impl Fn(&RunResult) -> f64) -> Result<McEstimate> {
    let xs: Vec<f64> = results.iter().filter(|r| r.hit()).map(f).collect();
    summarize(&xs, results.len() - xs.len())
}

pub fn estimate_payoff(config: &SimConfig, start: (PolarState, Tack), n_paths: usize) -> Result<McEstimate> {
    if n_paths < 2 {
        return Err(Error::param("n_paths", "must be >= 2"));
    }
    estimate_from_results(&run_batch(config, start, n_paths)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub i: usize,
    /// Fraction of paths with at least `i` tacks before the target.
    pub p_hat: f64,
    /// Binomial standard error.
    pub stderr: f64,
}

/// Empirical `P{ψ_i < τ}` for `i = 0..=max_i`. Paths that time out never
/// reach the target, so they count as survivors for every `i`.
pub fn tail_from_results(results: &[RunResult], max_i: usize) -> Vec<TailPoint> {
    let n = results.len().max(1) as f64;
    (0..=max_i)
        .map(|i| {
            let k = results
                .iter()
                .filter(|r| !r.hit() || r.tacks as usize >= i)
                .count() as f64;
            let p = k / n;
            TailPoint {
                i,
                p_hat: p,
                stderr: (p * (1.0 - p) / n).sqrt(),
            }
        })
        .collect()
}

pub fn tack_tail_distribution(
    config: &SimConfig,
    start: (PolarState, Tack),
    n_paths: usize,
    max_i: usize,
) -> Result<Vec<TailPoint>> {
    Ok(tail_from_results(&run_batch(config, start, n_paths)?, max_i))
}
