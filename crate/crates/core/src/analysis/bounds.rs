//! Analytic constants and upper bounds for the impulse strategy, and the
//! almost-sure bound for the feedback strategy.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::dynamics::ModelParams;
use crate::strategies::ImpulseGeometry;
use crate::{Error, Result};

/// Truncation threshold for the strip-probability series.
pub const SERIES_TOL: f64 = 1e-12;
/// Below this value of `π²σ²T/(8a²)` the image (Gaussian) series converges
/// faster than the exponential one.
const SMALL_TIME_SWITCH: f64 = 0.5;

/// Commonly quoted value of the contraction product, kept for comparison.
pub const C1C2_REFERENCE: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    /// Bound on the expected holding time between tacks.
    #[serde(rename = "K")]
    pub k: f64,
    pub d1: f64,
    pub d2: f64,
    /// Calm-wind time-to-target bound at the start radius.
    #[serde(rename = "Gamma_r")]
    pub gamma_r: f64,
    /// Same bound at the outer radius `r0` (the horizon of `p0`).
    #[serde(rename = "Gamma_r0")]
    pub gamma_r0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c1c2: f64,
    pub c1sq_c2sq: f64,
    pub c1c2_reference: f64,
    pub c1c2_below_reference: bool,
    /// Probability that the wind stays within `α/2` over `Gamma_r0`.
    pub p0: f64,
    pub ln_p0: f64,
    #[serde(rename = "E_tau_bound")]
    pub e_tau_bound: f64,
    #[serde(rename = "E_M_bound")]
    pub e_m_bound: f64,
    #[serde(rename = "V_c_eta_bound")]
    pub v_c_eta_bound: f64,
    #[serde(rename = "V_eta_bound")]
    pub v_eta_bound: f64,
    pub astar_tau_bound: f64,
}

/// Calm-wind bound on the time to reach the target from radius `r`.
pub fn gamma(r: f64, eta: f64, v: f64, alpha: f64) -> f64 {
    let (d1, d2) = confinement_constants(alpha);
    (1.0 / alpha.cos() + 1.0) * (r - eta) / v + (d1 + d2) * r / v
}

/// `(d1, d2)`: how far the boat can get from the target, in units of the
/// start radius, on the first and second calm legs.
pub fn confinement_constants(alpha: f64) -> (f64, f64) {
    let s = (0.5 * alpha).sin();
    let t = alpha.tan();
    let d1 = s * t + 1.0;
    let d2 = (s + t) * alpha.cos() / (2.0 * alpha).cos();
    (d1, d2)
}

/// `(c1, c2)`: radial contraction factors over one calm tack cycle.
pub fn contraction_constants(alpha: f64) -> (f64, f64) {
    let (d1, d2) = confinement_constants(alpha);
    let c = (1.5 * alpha).cos();
    let s = (0.5 * alpha).sin();
    let c1sq = 1.0 + (d1 - c).powi(2) - c * c;
    let c2sq = 1.0 + (d2 + s).powi(2) - s * s;
    (c1sq.sqrt(), c2sq.sqrt())
}

/// Bound on the expected time between tacks: `σ⁻²(α + 3π/4)²`.
pub fn holding_time_bound(sigma: f64, alpha: f64) -> f64 {
    (alpha + 3.0 * FRAC_PI_4).powi(2) / (sigma * sigma)
}

pub fn compute_bounds(params: &ModelParams, alpha: f64, r0: f64, r_start: f64) -> Result<BoundsReport> {
    params.validate()?;
    if !(params.sigma > 0.0) {
        return Err(Error::param("sigma", "bounds need sigma > 0"));
    }
    let g = ImpulseGeometry::new(params.eta, alpha, r0)?;
    if !(r_start > g.eta && r_start <= g.r0) {
        return Err(Error::param(
            "r_start",
            format!("must lie in ({}, {}], got {r_start}", g.eta, g.r0),
        ));
    }
    let (v, eta, sigma, c) = (params.v, params.eta, params.sigma, params.c);
    let k = holding_time_bound(sigma, alpha);
    let (d1, d2) = confinement_constants(alpha);
    let (c1, c2) = contraction_constants(alpha);
    let gamma_r = gamma(r_start, eta, v, alpha);
    let gamma_r0 = gamma(r0, eta, v, alpha);
    let ln_p0 = ln_strip_stay_prob(0.5 * alpha, gamma_r0, sigma)?;
    let p0 = ln_p0.exp();
    // 1/p0 can exceed f64 range only for absurd parameters; the log keeps
    // the bounds finite whenever they are representable
    let inv_p0 = (-ln_p0).exp();
    let e_m_bound = 2.0 * inv_p0 - 1.0;
    let e_tau_bound = 2.0 * k * inv_p0;
    let factor = 1.0 + 2.0 * inv_p0;
    Ok(BoundsReport {
        k,
        d1,
        d2,
        gamma_r,
        gamma_r0,
        c1,
        c2,
        c1c2: c1 * c2,
        c1sq_c2sq: (c1 * c2).powi(2),
        c1c2_reference: C1C2_REFERENCE,
        c1c2_below_reference: c1 * c2 <= C1C2_REFERENCE,
        p0,
        ln_p0,
        e_tau_bound,
        e_m_bound,
        v_c_eta_bound: k * factor + c * factor,
        v_eta_bound: k * factor,
        astar_tau_bound: astar_tau_bound(r_start, eta, v),
    })
}

/// Almost-sure time-to-target bound of the feedback strategy.
pub fn astar_tau_bound(r: f64, eta: f64, v: f64) -> f64 {
    SQRT_2 * (r - eta) / v
}

/// `P{sup_{t ≤ T} |σB_t| < a}`.
pub fn strip_stay_prob(a: f64, t: f64, sigma: f64) -> Result<f64> {
    Ok(ln_strip_stay_prob(a, t, sigma)?.exp())
}

/// Natural log of [`strip_stay_prob`]; stays accurate when the probability
/// underflows.
pub fn ln_strip_stay_prob(a: f64, t: f64, sigma: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::param("a", format!("half-width must be > 0, got {a}")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::param("T", format!("must be >= 0, got {t}")));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::param("sigma", format!("must be >= 0, got {sigma}")));
    }
    if t == 0.0 || sigma == 0.0 {
        return Ok(0.0);
    }
    let x = PI * PI * sigma * sigma * t / (8.0 * a * a);
    if x >= SMALL_TIME_SWITCH {
        // (4/π) Σ (−1)^k/(2k+1) exp(−(2k+1)² x), with exp(−x) factored out
        let mut sum = 0.0;
        let mut k = 0u32;
        loop {
            let m = (2 * k + 1) as f64;
            let term = (-(m * m - 1.0) * x).exp() / m;
            if k > 0 && term < SERIES_TOL {
                break;
            }
            sum += if k.is_multiple_of(2) { term } else { -term };
            k += 1;
        }
        Ok((4.0 / PI).ln() - x + sum.ln())
    } else {
        // image series: 1 − erfc(b/√2) + Σ_{k≥1} (−1)^k [erfc((2k−1)b/√2) − erfc((2k+1)b/√2)]
        let b = a / (sigma * t.sqrt()) / SQRT_2;
        let mut p = 1.0 - erfc(b);
        let mut k = 1u32;
        loop {
            let lo = erfc((2 * k - 1) as f64 * b);
            let hi = erfc((2 * k + 1) as f64 * b);
            let term = lo - hi;
            if term.abs() < SERIES_TOL {
                break;
            }
            p += if k.is_multiple_of(2) { term } else { -term };
            k += 1;
        }
        Ok(p.clamp(f64::MIN_POSITIVE, 1.0).ln())
    }
}
