//! Drifts, diffusion, closed-form solutions and coordinate maps.
//!
//! Angles are unwrapped everywhere except at branch evaluation, where they are
//! wrapped into the canonical window `[-π/4, 7π/4)`. Branch boundaries follow
//! the half-open intervals of the drift definitions: a boundary point belongs
//! to the interval that is closed on that side.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Lower end of the canonical angle window `[-π/4, 7π/4)`.
pub const WRAP_LO: f64 = -FRAC_PI_4;
/// Upper (excluded) end of the canonical angle window.
pub const WRAP_HI: f64 = 7.0 * FRAC_PI_4;

/// Reduces an angle into `[-π/4, 7π/4)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = (theta - WRAP_LO).rem_euclid(TAU) + WRAP_LO;
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= WRAP_HI {
        w - TAU
    } else {
        w
    }
}

/// Which side the wind comes over: starboard (+1) or port (−1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Tack {
    Starboard,
    Port,
}

impl Tack {
    pub fn sign(self) -> f64 {
        match self {
            Tack::Starboard => 1.0,
            Tack::Port => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Tack::Starboard => 1,
            Tack::Port => -1,
        }
    }

    pub fn flipped(self) -> Tack {
        match self {
            Tack::Starboard => Tack::Port,
            Tack::Port => Tack::Starboard,
        }
    }
}

impl From<Tack> for i8 {
    fn from(t: Tack) -> i8 {
        t.as_i8()
    }
}

impl TryFrom<i8> for Tack {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, Self::Error> {
        match v {
            1 => Ok(Tack::Starboard),
            -1 => Ok(Tack::Port),
            other => Err(format!("tack must be +1 or -1, got {other}")),
        }
    }
}

/// The four physical parameters of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Wind-angle volatility (rad per square-root time). Zero gives a constant wind.
    pub sigma: f64,
    /// Upwind boat speed along either layline direction.
    pub v: f64,
    /// Time penalty per tack.
    pub c: f64,
    /// Target radius.
    pub eta: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            sigma: 1.0,
            v: 1.0,
            c: 0.5,
            eta: 0.1,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::param("sigma", format!("must be >= 0, got {}", self.sigma)));
        }
        if !(self.v.is_finite() && self.v > 0.0) {
            return Err(Error::param("v", format!("must be > 0, got {}", self.v)));
        }
        if !(self.c.is_finite() && self.c >= 0.0) {
            return Err(Error::param("c", format!("must be >= 0, got {}", self.c)));
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(Error::param("eta", format!("must be >= 0, got {}", self.eta)));
        }
        Ok(())
    }
}

/// Position in polar coordinates of the rotating frame. `theta` is unwrapped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarState {
    pub r: f64,
    pub theta: f64,
}

impl PolarState {
    pub fn new(r: f64, theta: f64) -> Self {
        PolarState { r, theta }
    }
}

/// Position in Cartesian coordinates (also used for 2-vectors).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianState {
    pub x: f64,
    pub y: f64,
}

impl CartesianState {
    pub fn new(x: f64, y: f64) -> Self {
        CartesianState { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn rotated(&self, angle: f64) -> CartesianState {
        let (s, c) = angle.sin_cos();
        CartesianState {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
        }
    }
}

/// Radial drift for the given tack.
pub fn mu1(theta: f64, tack: Tack, v: f64) -> f64 {
    radial_drift_wrapped(wrap_angle(theta), tack, v)
}

/// Angular drift for the given tack. Errors when `r <= 0`.
pub fn mu2(r: f64, theta: f64, tack: Tack, v: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("angular drift needs r > 0, got {r}")));
    }
    Ok(polar_drift(r, theta, tack, v).1)
}

fn radial_drift_wrapped(w: f64, tack: Tack, v: f64) -> f64 {
    match tack {
        Tack::Starboard => {
            if w < FRAC_PI_2 {
                -v * w.sin()
            } else if w < PI {
                -v
            } else {
                v * w.cos()
            }
        }
        Tack::Port => {
            if w < 0.0 {
                -v
            } else if w < 3.0 * FRAC_PI_4 {
                -v * w.cos()
            } else if w < 3.0 * FRAC_PI_2 {
                v * w.sin()
            } else {
                -v
            }
        }
    }
}

/// Radial and angular drift `(mu1, mu2)` in one wrap. Caller guarantees `r > 0`.
pub fn polar_drift(r: f64, theta: f64, tack: Tack, v: f64) -> (f64, f64) {
    let w = wrap_angle(theta);
    let (s, c) = w.sin_cos();
    match tack {
        Tack::Starboard => {
            if w < FRAC_PI_2 {
                (-v * s, -v * c / r)
            } else if w < PI {
                (-v, 0.0)
            } else {
                (v * c, -v * s / r)
            }
        }
        Tack::Port => {
            if w < 0.0 {
                (-v, 0.0)
            } else if w < 3.0 * FRAC_PI_4 {
                (-v * c, v * s / r)
            } else if w < 3.0 * FRAC_PI_2 {
                (v * s, v * c / r)
            } else {
                (-v, 0.0)
            }
        }
    }
}

/// Boat velocity direction in the rotating frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Heading {
    Up,
    Down,
    Left,
    Right,
    /// Straight at the target.
    Radial,
}

/// Heading selected by the tack at a polar angle.
pub fn heading(theta: f64, tack: Tack) -> Heading {
    let w = wrap_angle(theta);
    match tack {
        Tack::Starboard => {
            if w < FRAC_PI_2 {
                Heading::Down
            } else if w < PI {
                Heading::Radial
            } else {
                Heading::Right
            }
        }
        Tack::Port => {
            if w < 0.0 {
                Heading::Radial
            } else if w < 3.0 * FRAC_PI_4 {
                Heading::Left
            } else if w < 3.0 * FRAC_PI_2 {
                Heading::Up
            } else {
                Heading::Radial
            }
        }
    }
}

/// Cartesian drift: boat velocity for the zone plus the Itô correction `-(σ²/2) p`.
/// The zone is read from the polar angle, so the origin is rejected.
pub fn mu_cart(p: CartesianState, tack: Tack, params: &ModelParams) -> Result<CartesianState> {
    if p.x == 0.0 && p.y == 0.0 {
        return Err(Error::Domain("drift is undefined at the origin".into()));
    }
    let v = params.v;
    let theta = p.y.atan2(p.x);
    let vel = match heading(theta, tack) {
        Heading::Up => CartesianState::new(0.0, v),
        Heading::Down => CartesianState::new(0.0, -v),
        Heading::Left => CartesianState::new(-v, 0.0),
        Heading::Right => CartesianState::new(v, 0.0),
        Heading::Radial => {
            let n = p.norm();
            CartesianState::new(-v * p.x / n, -v * p.y / n)
        }
    };
    let k = -0.5 * params.sigma * params.sigma;
    Ok(CartesianState::new(vel.x + k * p.x, vel.y + k * p.y))
}

/// Diffusion column `(-σy, σx)`.
pub fn sigma_cart(p: CartesianState, sigma: f64) -> CartesianState {
    CartesianState::new(-sigma * p.y, sigma * p.x)
}

/// Wind-angle path `σB` sampled on a uniform grid starting at time 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    pub dt: f64,
    /// `values[k]` is the wind angle at time `k·dt`.
    pub values: Vec<f64>,
}

impl SampledPath {
    pub fn end_time(&self) -> f64 {
        self.dt * (self.values.len().saturating_sub(1)) as f64
    }

    fn grid_index(&self, t: f64) -> Result<usize> {
        if !(self.dt > 0.0) || self.values.is_empty() {
            return Err(Error::Malformed("empty wind path".into()));
        }
        let k = t / self.dt;
        let n = k.round();
        if !(t >= 0.0) || (k - n).abs() > 1e-6 {
            return Err(Error::Domain(format!("t = {t} is not on the path grid")));
        }
        let n = n as usize;
        if n >= self.values.len() {
            return Err(Error::Domain(format!(
                "t = {t} beyond path end {}",
                self.end_time()
            )));
        }
        Ok(n)
    }
}

/// Position at time `t` of a boat with constant rotating-frame velocity
/// `v_vec`, started at `x0`, under the sampled wind path. The two time
/// integrals are computed with the trapezoidal rule on the path grid.
pub fn closed_form_velocity(
    x0: CartesianState,
    v_vec: (f64, f64),
    path: &SampledPath,
    t: f64,
) -> Result<CartesianState> {
    let n = path.grid_index(t)?;
    let b_t = path.values[n] - path.values[0];
    let mut int_cos = 0.0;
    let mut int_sin = 0.0;
    if n > 0 {
        let w = &path.values[..=n];
        let f = |k: usize| {
            let d = path.values[n] - w[k];
            d.sin_cos()
        };
        let (s0, c0) = f(0);
        let (sn, cn) = f(n);
        int_cos = 0.5 * (c0 + cn);
        int_sin = 0.5 * (s0 + sn);
        for k in 1..n {
            let (s, c) = f(k);
            int_cos += c;
            int_sin += s;
        }
        int_cos *= path.dt;
        int_sin *= path.dt;
    }
    let rot = x0.rotated(b_t);
    let (v1, v2) = v_vec;
    Ok(CartesianState::new(
        rot.x + v1 * int_cos - v2 * int_sin,
        rot.y + v1 * int_sin + v2 * int_cos,
    ))
}

/// Position at time `t` of a boat sailing straight at the target, given the
/// wind angle `sigma_b_t` accumulated since time 0.
pub fn closed_form_radial(
    x0: CartesianState,
    params: &ModelParams,
    sigma_b_t: f64,
    t: f64,
) -> Result<CartesianState> {
    let r0 = x0.norm();
    let t_max = (r0 - params.eta) / params.v;
    if !(t >= 0.0 && t <= t_max) {
        return Err(Error::Domain(format!("t = {t} outside [0, {t_max}]")));
    }
    let theta = x0.y.atan2(x0.x);
    let rad = r0 - params.v * t;
    let (s, c) = (sigma_b_t + theta).sin_cos();
    Ok(CartesianState::new(rad * c, rad * s))
}

/// Feedback tack: starboard on `[π/4, 5π/4)` mod 2π, port otherwise.
pub fn a_star(theta: f64) -> Tack {
    let w = wrap_angle(theta);
    if (FRAC_PI_4..5.0 * FRAC_PI_4).contains(&w) {
        Tack::Starboard
    } else {
        Tack::Port
    }
}

/// Drifts under the feedback tack. The radial part never exceeds `-v/√2`.
pub fn mu_star(r: f64, theta: f64, v: f64) -> Result<(f64, f64)> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("drift needs r > 0, got {r}")));
    }
    Ok(polar_drift(r, theta, a_star(theta), v))
}

/// Upper bound on the radial drift under the feedback tack.
pub fn mu_star_radial_cap(v: f64) -> f64 {
    -v * FRAC_1_SQRT_2
}

/// Smallest admissible damping index: the least `n >= 1` with `1/n < eta`.
pub fn min_damping_n(eta: f64) -> Result<u32> {
    if !(eta > 0.0) {
        return Err(Error::param("eta", "damping needs eta > 0"));
    }
    let n = (1.0 / eta).floor() + 1.0;
    if n > u32::MAX as f64 {
        return Err(Error::param("eta", "too small for a damping index"));
    }
    Ok(n as u32)
}

/// Canonical damping index `ceil(2/eta)`, so the ramp starts at `eta/2` or above.
pub fn default_damping_n(eta: f64) -> Result<u32> {
    let lo = min_damping_n(eta)?;
    Ok(((2.0 / eta).ceil() as u32).max(lo))
}

/// Damping factor: 0 below `eta - 1/n`, linear ramp up to 1 at `eta`, 1 above.
pub fn phi_damping(r: f64, eta: f64, n: u32) -> Result<f64> {
    let lo = min_damping_n(eta)?;
    if n < lo {
        return Err(Error::param(
            "damping_n",
            format!("must be at least {lo} for eta = {eta}, got {n}"),
        ));
    }
    Ok(phi_unchecked(r, eta, n as f64))
}

#[inline]
pub(crate) fn phi_unchecked(r: f64, eta: f64, n: f64) -> f64 {
    if r >= eta {
        1.0
    } else if r <= eta - 1.0 / n {
        0.0
    } else {
        n * (r - eta) + 1.0
    }
}

/// Angle after a tack in the one-tack representation: `π/2 - θ`, wrapped.
pub fn tack_jump(theta: f64) -> f64 {
    wrap_angle(FRAC_PI_2 - theta)
}

pub fn to_polar(p: CartesianState) -> Result<PolarState> {
    if p.x == 0.0 && p.y == 0.0 {
        return Err(Error::Domain("the origin has no polar angle".into()));
    }
    Ok(PolarState::new(p.norm(), wrap_angle(p.y.atan2(p.x))))
}

pub fn from_polar(s: PolarState) -> CartesianState {
    let (sn, cs) = s.theta.sin_cos();
    CartesianState::new(s.r * cs, s.r * sn)
}

/// Maps rotating-frame coordinates to the geographic frame `(ξ1, ξ2)` for the
/// wind angle `beta`. At `beta = 0` the rotating x-axis lands on the port
/// layline `ξ2 = -ξ1` and the y-axis on the starboard layline `ξ2 = ξ1`.
/// A wind shift rotates rotating-frame positions by `+Δβ`, and this map undoes
/// it, so geographic positions stay continuous across shifts.
pub fn to_geographic(p: CartesianState, beta: f64) -> CartesianState {
    p.rotated(-FRAC_PI_4 - beta)
}
