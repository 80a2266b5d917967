//! Euler–Maruyama simulation of the controlled boat.
//!
//! The impulse strategy runs by default in the one-tack representation: the
//! simulated state is always on starboard and a tack replaces `θ` by
//! `π/2 − θ`. A parity flag remembers whether the simulated state is the
//! mirror image of the physical one, so the physical angle and tack are
//! replayed alongside for output. The feedback strategy always runs in
//! physical coordinates.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    phi_unchecked, polar_drift, tack_jump, wrap_angle, ModelParams, PolarState, Tack,
};
use crate::strategies::{
    classify_region, decide_a_star, past_port_layline, reduced_angle, ImpulseGeometry, RegionId,
    StrategyKind,
};
use crate::wind::{WindSource, WindState};
use crate::{Error, Result};

/// Horizon multiplier: default horizon is this many times `max(r0, r)/v`.
pub const DEFAULT_HORIZON_FACTOR: f64 = 200.0;
/// Default step as a fraction of `r0/v` (or `r/v` for the feedback strategy).
pub const DEFAULT_DT_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Damping {
    /// Coefficients switched off below the target radius.
    Indicator,
    /// Coefficients ramped linearly to zero over `[eta - 1/n, eta]`.
    Linear { n: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// Always-starboard state with tacks as angle jumps (impulse strategy only).
    Reduced,
    /// Physical angle and tack.
    Physical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: ModelParams,
    pub strategy: StrategyKind,
    pub dt: f64,
    /// Defaults to `200·max(r0, start r)/v` when absent.
    pub horizon: Option<f64>,
    pub seed: u64,
    pub record_trajectory: bool,
    /// Keep every `record_stride`-th step (event steps are always kept).
    pub record_stride: usize,
    pub damping: Damping,
    pub representation: Representation,
    /// Defaults to Brownian wind with `model.sigma` and `seed`.
    pub wind: Option<WindSource>,
    /// Negate every wind increment (mirror coupling).
    pub mirror_wind: bool,
}

impl SimConfig {
    pub fn new(model: ModelParams, strategy: StrategyKind, dt: f64) -> Self {
        SimConfig {
            model,
            strategy,
            dt,
            horizon: None,
            seed: DEFAULT_SEED,
            record_trajectory: false,
            record_stride: 1,
            damping: Damping::Indicator,
            representation: Representation::Reduced,
            wind: None,
            mirror_wind: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.strategy.validate(self.model.eta)?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::param("dt", format!("must be > 0, got {}", self.dt)));
        }
        if let Some(h) = self.horizon {
            if !(h.is_finite() && h >= self.dt) {
                return Err(Error::param("horizon", format!("must be >= dt, got {h}")));
            }
        }
        if self.record_stride == 0 {
            return Err(Error::param("record_stride", "must be >= 1"));
        }
        if let Damping::Linear { n } = self.damping {
            crate::dynamics::phi_damping(self.model.eta, self.model.eta, n)?;
        }
        if let Some(w) = &self.wind {
            w.validate()?;
        }
        Ok(())
    }

    pub fn wind_source(&self) -> WindSource {
        self.wind.clone().unwrap_or(WindSource::BrownianCircle {
            sigma: self.model.sigma,
            seed: self.seed,
        })
    }

    pub fn resolved_horizon(&self, start_r: f64) -> f64 {
        self.horizon.unwrap_or_else(|| {
            let scale = match self.strategy {
                StrategyKind::ImpulseA { r0, .. } => r0.max(start_r),
                StrategyKind::FeedbackAStar => start_r,
            };
            DEFAULT_HORIZON_FACTOR * scale / self.model.v
        })
    }
}

/// Fixed master seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_917;

/// Default time step for a strategy and start radius.
pub fn default_dt(strategy: &StrategyKind, v: f64, start_r: f64) -> f64 {
    let scale = match *strategy {
        StrategyKind::ImpulseA { r0, .. } => r0,
        StrategyKind::FeedbackAStar => start_r,
    };
    DEFAULT_DT_FRACTION * scale / v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    None,
    Tack,
    Hit,
    Timeout,
    WindShift,
    TackWindShift,
}

impl Event {
    pub fn as_str(self) -> &'static str {
        match self {
            Event::None => "none",
            Event::Tack => "tack",
            Event::Hit => "hit",
            Event::Timeout => "timeout",
            Event::WindShift => "wind_shift",
            Event::TackWindShift => "tack+wind_shift",
        }
    }

    pub fn parse(s: &str) -> Option<Event> {
        Some(match s {
            "none" => Event::None,
            "tack" => Event::Tack,
            "hit" => Event::Hit,
            "timeout" => Event::Timeout,
            "wind_shift" => Event::WindShift,
            "tack+wind_shift" => Event::TackWindShift,
            _ => return None,
        })
    }

    pub fn is_tack(self) -> bool {
        matches!(self, Event::Tack | Event::TackWindShift)
    }

    fn with_shift(self) -> Event {
        match self {
            Event::Tack | Event::TackWindShift => Event::TackWindShift,
            _ => Event::WindShift,
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One trajectory sample in physical coordinates of the rotating frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: f64,
    pub r: f64,
    /// Unwrapped physical angle.
    pub theta: f64,
    pub tack: Tack,
    /// Unwrapped wind angle.
    pub wind_angle: f64,
    pub event: Event,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<Record>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Hit,
    Timeout,
}

/// How a tack of the impulse strategy was triggered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TackKind {
    /// Entry into the inner tacking region.
    Nu,
    /// Entry into the outer circle.
    Rho,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingTime {
    pub time: f64,
    pub kind: TackKind,
    /// Radius at the tack.
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    /// Hitting time (interpolated), or the time reached at timeout.
    pub tau: f64,
    /// Tack count. For the feedback strategy these are the free tack changes.
    pub tacks: u32,
    /// `tau + c·tacks` for the impulse strategy, `tau` for the feedback strategy.
    pub payoff: f64,
    pub terminated: Termination,
    /// Tack times of the impulse strategy.
    pub stopping_times: Vec<StoppingTime>,
    /// After each tack (and after the start), first time the starboard-equivalent
    /// angle is past the port layline.
    pub layline_times: Vec<f64>,
    /// First exit of the start band `[π/2 − α, π/2 + α]`, capped at `tau`.
    /// Only set for impulse runs started in the band.
    pub zeta: Option<f64>,
    /// First `i` such that the wind stays within `α/2` of its value at the
    /// `(i−1)`-th tack until the end of the run.
    pub e1_first_index: Option<usize>,
    pub start_outside_disk: bool,
    pub max_radius: f64,
    pub min_radius: f64,
    /// Largest radius seen before the first tack (or the end of the run).
    pub max_radius_before_first_tack: f64,
    /// Extreme radial increments over full Euler steps.
    pub dr_min: f64,
    pub dr_max: f64,
    pub final_state: PolarState,
    pub final_tack: Tack,
    pub steps: u64,
}

impl RunResult {
    pub fn hit(&self) -> bool {
        self.terminated == Termination::Hit
    }
}

/// What an external wind controller sees after each step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepView {
    pub t: f64,
    pub r: f64,
    /// Unwrapped physical angle.
    pub theta: f64,
    pub tack: Tack,
    /// Wrapped angle of the starboard-equivalent state.
    pub reduced_theta: f64,
    pub wind_angle: f64,
    /// Set when a tack happened on this step.
    pub tacked: Option<TackKind>,
    /// Reduced angle just before the tack of this step, if any.
    pub reduced_theta_before_tack: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ControlAction {
    /// Physical wind-angle jump applied before the next step.
    pub shift: Option<f64>,
    pub stop: bool,
}

/// State-coupled wind that reacts to the boat between steps.
pub trait WindController {
    fn after_step(&mut self, view: &StepView) -> ControlAction;
}

/// One explicit Euler–Maruyama step with drifts frozen at the pre-step state.
pub fn step_polar(
    s: PolarState,
    tack: Tack,
    d_beta: f64,
    dt: f64,
    params: &ModelParams,
    damping: Damping,
) -> Result<PolarState> {
    if !(s.r > 0.0) {
        return Err(Error::Domain(format!("step needs r > 0, got {}", s.r)));
    }
    let phi = damping_factor(s.r, params.eta, damping);
    if phi == 0.0 {
        return Ok(s);
    }
    let (m1, m2) = polar_drift(s.r, s.theta, tack, params.v);
    Ok(PolarState::new(
        s.r + phi * m1 * dt,
        s.theta + phi * m2 * dt + phi * d_beta,
    ))
}

#[inline]
fn damping_factor(r: f64, eta: f64, damping: Damping) -> f64 {
    match damping {
        Damping::Indicator => {
            if r > eta {
                1.0
            } else {
                0.0
            }
        }
        Damping::Linear { n } => phi_unchecked(r, eta, n as f64),
    }
}

/// Runs path 0 of the configuration.
pub fn run(config: &SimConfig, start: (PolarState, Tack)) -> Result<(RunResult, Option<Trajectory>)> {
    run_path(config, start, 0)
}

/// Runs one Monte Carlo path; the wind stream is derived from `(seed, path_index)`.
pub fn run_path(
    config: &SimConfig,
    start: (PolarState, Tack),
    path_index: u64,
) -> Result<(RunResult, Option<Trajectory>)> {
    run_controlled(config, start, path_index, None)
}

#[derive(Clone, Copy)]
struct Segment {
    reference: f64,
    max: f64,
    min: f64,
}

/// Runs one path with an optional wind controller acting between steps.
pub fn run_controlled(
    config: &SimConfig,
    start: (PolarState, Tack),
    path_index: u64,
    mut controller: Option<&mut dyn WindController>,
) -> Result<(RunResult, Option<Trajectory>)> {
    config.validate()?;
    let (s0, tack0) = start;
    let params = config.model;
    let eta = params.eta;
    let v = params.v;
    let dt = config.dt;
    if !(s0.r.is_finite() && s0.theta.is_finite()) {
        return Err(Error::Domain("start state is not finite".into()));
    }
    if !(s0.r > eta) {
        return Err(Error::Domain(format!(
            "start radius {} must exceed the target radius {eta}",
            s0.r
        )));
    }

    let geom = match config.strategy {
        StrategyKind::ImpulseA { alpha, r0 } => Some(ImpulseGeometry::new(eta, alpha, r0)?),
        StrategyKind::FeedbackAStar => None,
    };
    let reduced = geom.is_some() && config.representation == Representation::Reduced;

    let source = config.wind_source();
    let mut stream = source.stream(path_index);
    if config.mirror_wind {
        stream = stream.negated();
    }
    let mut wind = WindState::new(source.initial_angle());

    let horizon = config.resolved_horizon(s0.r);
    let max_steps = (horizon / dt - 1e-9).ceil().max(1.0) as u64;

    // simulated state
    let mut r = s0.r;
    let mut th_phys = s0.theta;
    let mut tack_phys = tack0;
    let (mut th, mut tack_sim, mut mirrored) = if reduced && tack0 == Tack::Port {
        (tack_jump(s0.theta), Tack::Starboard, true)
    } else {
        (s0.theta, tack0, false)
    };
    if geom.is_none() {
        tack_sim = decide_a_star(PolarState::new(r, th));
        tack_phys = tack_sim;
    }

    let start_outside_disk = geom.is_some_and(|g| s0.r > g.r0);
    let in_band_start = geom.is_some_and(|g| {
        g.in_start_band(PolarState::new(s0.r, reduced_angle(s0.theta, tack0)))
    });

    let mut t = 0.0;
    let mut steps: u64 = 0;
    let mut tacks: u32 = 0;
    let mut stopping_times = Vec::new();
    let mut layline_times = Vec::new();
    let mut layline_pending = true;
    let mut zeta: Option<f64> = None;
    let mut max_radius = r;
    let mut min_radius = r;
    let mut max_r_pre_tack = r;
    let mut dr_min = f64::INFINITY;
    let mut dr_max = f64::NEG_INFINITY;
    let mut segments: Vec<Segment> = Vec::new();
    let mut seg = Segment {
        reference: wind.cumulative_angle,
        max: wind.cumulative_angle,
        min: wind.cumulative_angle,
    };

    let mut traj = config.record_trajectory.then(Trajectory::default);

    let reduced_now = |th: f64, tack_phys: Tack, th_phys: f64| -> f64 {
        if reduced {
            wrap_angle(th)
        } else {
            reduced_angle(th_phys, tack_phys)
        }
    };

    macro_rules! apply_tack {
        ($kind:expr) => {{
            if reduced {
                th = tack_jump(th);
                mirrored = !mirrored;
            } else {
                tack_sim = tack_sim.flipped();
            }
            tack_phys = tack_phys.flipped();
            tacks += 1;
            stopping_times.push(StoppingTime {
                time: t,
                kind: $kind,
                r,
            });
            segments.push(seg);
            wind.reset_calm_tracker();
            seg = Segment {
                reference: wind.cumulative_angle,
                max: wind.cumulative_angle,
                min: wind.cumulative_angle,
            };
            layline_pending = true;
        }};
    }

    let check_impulse = |r: f64, th: f64, tack_sim: Tack, g: &ImpulseGeometry| -> Option<TackKind> {
        match classify_region(PolarState::new(r, th), tack_sim, g) {
            RegionId::D1_1 | RegionId::Dm1_1 => Some(TackKind::Nu),
            RegionId::D1_2 | RegionId::Dm1_2 => Some(TackKind::Rho),
            _ => None,
        }
    };

    // a start inside a tacking region tacks at once
    let mut first_event = Event::None;
    if let Some(g) = &geom {
        if in_band_start {
            let w = reduced_now(th, tack_phys, th_phys);
            if (w - FRAC_PI_2).abs() > g.alpha {
                zeta = Some(0.0);
            }
        }
        let w = reduced_now(th, tack_phys, th_phys);
        if past_port_layline(w) {
            layline_times.push(0.0);
            layline_pending = false;
        }
        if let Some(kind) = check_impulse(r, th, tack_sim, g) {
            apply_tack!(kind);
            first_event = Event::Tack;
        }
    }
    if let Some(tr) = traj.as_mut() {
        tr.records.push(Record {
            t: 0.0,
            r,
            theta: th_phys,
            tack: tack_phys,
            wind_angle: wind.cumulative_angle,
            event: first_event,
        });
    }

    let mut terminated = Termination::Timeout;
    let mut tau = 0.0;
    let phys_sign = |mirrored: bool| if mirrored { -1.0 } else { 1.0 };

    while steps < max_steps {
        let d_beta = stream.next_increment(&mut wind, dt);
        let noise = if reduced { phys_sign(mirrored) * d_beta } else { d_beta };
        let phi = damping_factor(r, eta, config.damping);
        let (m1, m2) = polar_drift(r, th, tack_sim, v);
        let r_new = r + phi * m1 * dt;
        let th_new = th + phi * m2 * dt + phi * noise;
        steps += 1;
        let t_prev = t;
        t = steps as f64 * dt;
        if !(r_new.is_finite() && th_new.is_finite()) {
            return Err(Error::Diverged {
                t,
                detail: format!("state became non-finite (r = {r_new}, theta = {th_new})"),
            });
        }
        let dr = r_new - r;
        dr_min = dr_min.min(dr);
        dr_max = dr_max.max(dr);
        let d_th = th_new - th;
        let d_phys = if reduced { phys_sign(mirrored) * d_th } else { d_th };
        seg.max = seg.max.max(wind.cumulative_angle);
        seg.min = seg.min.min(wind.cumulative_angle);

        if r_new <= eta {
            let frac = if r > r_new { (r - eta) / (r - r_new) } else { 1.0 };
            tau = t_prev + frac * dt;
            let th_hit = th_phys + frac * d_phys;
            r = eta;
            th_phys = th_hit;
            min_radius = min_radius.min(eta);
            terminated = Termination::Hit;
            if let Some(tr) = traj.as_mut() {
                tr.records.push(Record {
                    t: tau,
                    r: eta,
                    theta: th_hit,
                    tack: tack_phys,
                    wind_angle: wind.cumulative_angle,
                    event: Event::Hit,
                });
            }
            break;
        }
        r = r_new;
        th = th_new;
        th_phys += d_phys;
        max_radius = max_radius.max(r);
        min_radius = min_radius.min(r);
        if tacks == 0 {
            max_r_pre_tack = max_r_pre_tack.max(r);
        }

        let mut event = Event::None;
        let mut tacked = None;
        let mut before_tack = None;
        match &geom {
            Some(g) => {
                let w = reduced_now(th, tack_phys, th_phys);
                if in_band_start && zeta.is_none() && (w - FRAC_PI_2).abs() > g.alpha {
                    zeta = Some(t);
                }
                if layline_pending && past_port_layline(w) {
                    layline_times.push(t);
                    layline_pending = false;
                }
                if let Some(kind) = check_impulse(r, th, tack_sim, g) {
                    before_tack = Some(w);
                    apply_tack!(kind);
                    tacked = Some(kind);
                    event = Event::Tack;
                }
            }
            None => {
                let next = decide_a_star(PolarState::new(r, th));
                if next != tack_sim {
                    tack_sim = next;
                    tack_phys = next;
                    tacks += 1;
                    event = Event::Tack;
                }
            }
        }

        let mut stop = false;
        if let Some(ctrl) = controller.as_deref_mut() {
            let view = StepView {
                t,
                r,
                theta: th_phys,
                tack: tack_phys,
                reduced_theta: reduced_now(th, tack_phys, th_phys),
                wind_angle: wind.cumulative_angle,
                tacked,
                reduced_theta_before_tack: before_tack,
            };
            let action = ctrl.after_step(&view);
            if let Some(shift) = action.shift {
                if !shift.is_finite() {
                    return Err(Error::Diverged {
                        t,
                        detail: "controller produced a non-finite wind shift".into(),
                    });
                }
                wind.apply_shift(shift);
                th_phys += shift;
                th += if reduced { phys_sign(mirrored) * shift } else { shift };
                seg.max = seg.max.max(wind.cumulative_angle);
                seg.min = seg.min.min(wind.cumulative_angle);
                event = event.with_shift();
            }
            stop = action.stop;
        }

        if let Some(tr) = traj.as_mut() {
            if event != Event::None || steps.is_multiple_of(config.record_stride as u64) {
                tr.records.push(Record {
                    t,
                    r,
                    theta: th_phys,
                    tack: tack_phys,
                    wind_angle: wind.cumulative_angle,
                    event,
                });
            }
        }
        if stop {
            break;
        }
    }

    if terminated == Termination::Timeout {
        tau = t;
        if let Some(tr) = traj.as_mut() {
            match tr.records.last_mut() {
                Some(last) if last.t == t && last.event == Event::None => last.event = Event::Timeout,
                _ => tr.records.push(Record {
                    t,
                    r,
                    theta: th_phys,
                    tack: tack_phys,
                    wind_angle: wind.cumulative_angle,
                    event: Event::Timeout,
                }),
            }
        }
    }
    if in_band_start && zeta.is_none() {
        zeta = Some(tau);
    }
    segments.push(seg);

    let e1_first_index = geom.and_then(|g| first_calm_segment(&segments, g.alpha));
    let payoff = match geom {
        Some(_) => tau + params.c * tacks as f64,
        None => tau,
    };
    if steps == 0 {
        dr_min = 0.0;
        dr_max = 0.0;
    }

    let result = RunResult {
        tau,
        tacks,
        payoff,
        terminated,
        stopping_times,
        layline_times,
        zeta,
        e1_first_index,
        start_outside_disk,
        max_radius,
        min_radius,
        max_radius_before_first_tack: max_r_pre_tack,
        dr_min,
        dr_max,
        final_state: PolarState::new(r, th_phys),
        final_tack: tack_phys,
        steps,
    };
    Ok((result, traj))
}

/// First 1-based segment index whose reference angle stays within `alpha/2`
/// of the wind over the rest of the run.
fn first_calm_segment(segments: &[Segment], alpha: f64) -> Option<usize> {
    let half = 0.5 * alpha;
    let mut suffix_max = f64::NEG_INFINITY;
    let mut suffix_min = f64::INFINITY;
    let mut first = None;
    for (i, s) in segments.iter().enumerate().rev() {
        suffix_max = suffix_max.max(s.max);
        suffix_min = suffix_min.min(s.min);
        if suffix_max - s.reference < half && s.reference - suffix_min < half {
            first = Some(i + 1);
        }
    }
    first
}

/// Inter-tack holding times, ending with the time from the last tack to the
/// end of the run. They sum to `tau`.
pub fn extract_holding_times(result: &RunResult) -> Vec<f64> {
    let mut out = Vec::with_capacity(result.stopping_times.len() + 1);
    let mut prev = 0.0;
    for s in &result.stopping_times {
        out.push(s.time - prev);
        prev = s.time;
    }
    out.push(result.tau - prev);
    out
}

/// Whether the recorded wind stays strictly within `alpha/2` of its initial
/// value up to the end of the trajectory.
pub fn detect_e1(trajectory: &Trajectory, alpha: f64) -> bool {
    let Some(first) = trajectory.records.first() else {
        return true;
    };
    let w0 = first.wind_angle;
    trajectory
        .records
        .iter()
        .all(|rec| (rec.wind_angle - w0).abs() < 0.5 * alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wind::WindSchedule;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

    fn calm(eta: f64) -> ModelParams {
        ModelParams { sigma: 0.0, v: 1.0, c: 0.5, eta }
    }

    #[test]
    fn step_examples() {
        let p = calm(0.1);
        let s = step_polar(PolarState::new(1.0, 0.75 * PI), Tack::Starboard, 0.0, 0.01, &p, Damping::Indicator)
            .unwrap();
        assert_eq!(s.r, 1.0 - 0.01);
        assert_eq!(s.theta, 0.75 * PI);
        let frozen = PolarState::new(0.05, 1.0);
        let s = step_polar(frozen, Tack::Port, 0.3, 0.01, &p, Damping::Indicator).unwrap();
        assert_eq!(s, frozen);
        let s = step_polar(PolarState::new(1.0, 0.75 * PI), Tack::Starboard, 0.123, 0.01, &p, Damping::Indicator)
            .unwrap();
        assert_abs_diff_eq!(s.theta - 0.75 * PI, 0.123, epsilon = 1e-15);
        assert!(step_polar(PolarState::new(0.0, 0.0), Tack::Port, 0.0, 0.01, &p, Damping::Indicator).is_err());
    }

    #[test]
    fn damped_step_ramps() {
        let p = calm(0.1);
        let s0 = PolarState::new(0.1 - 1.0 / 40.0, 0.0);
        let s = step_polar(s0, Tack::Port, 0.0, 0.01, &p, Damping::Linear { n: 20 }).unwrap();
        assert_abs_diff_eq!(s.r - s0.r, -0.5 * 0.01, epsilon = 1e-15);
    }

    #[test]
    fn feedback_constant_wind_diagonal() {
        let cfg = SimConfig::new(calm(1.0), StrategyKind::FeedbackAStar, 1e-4);
        let (res, _) = run(&cfg, (PolarState::new(2.0, FRAC_PI_4), Tack::Starboard)).unwrap();
        assert!(res.hit());
        assert!((res.tau - SQRT_2).abs() <= 2.0 * cfg.dt, "tau = {}", res.tau);
        assert_eq!(res.payoff, res.tau);
    }

    #[test]
    fn impulse_straight_down_in_calm() {
        let strat = StrategyKind::ImpulseA { alpha: PI / 8.0, r0: 3.0 };
        let cfg = SimConfig::new(calm(0.1), strat, 1e-3);
        let (res, _) = run(&cfg, (PolarState::new(2.0, FRAC_PI_2), Tack::Starboard)).unwrap();
        assert!(res.hit());
        assert_eq!(res.tacks, 0);
        assert!((res.tau - 1.9).abs() <= 2.0 * cfg.dt);
        assert_eq!(extract_holding_times(&res), vec![res.tau]);
    }

    #[test]
    fn impulse_single_tack_in_calm() {
        // starboard in zone I sails down until past the port layline by alpha,
        // tacks once and then sails radially in
        let strat = StrategyKind::ImpulseA { alpha: 0.2, r0: 3.0 };
        let cfg = SimConfig::new(calm(0.1), strat, 1e-4);
        let (res, _) = run(&cfg, (PolarState::new(2.0, 1.0), Tack::Starboard)).unwrap();
        assert!(res.hit());
        assert_eq!(res.tacks, 1);
        assert_eq!(res.stopping_times[0].kind, TackKind::Nu);
        let h = extract_holding_times(&res);
        assert_eq!(h.len(), 2);
        assert_abs_diff_eq!(h.iter().sum::<f64>(), res.tau, epsilon = 1e-12);
        assert_abs_diff_eq!(res.payoff, res.tau + 0.5, epsilon = 1e-12);
        // x stays 2cos(1); y runs from 2sin(1) down to -x·tan(alpha)
        let x = 2.0 * 1f64.cos();
        let y_tack = -x * 0.2f64.tan();
        let psi = 2.0 * 1f64.sin() - y_tack;
        assert!((res.stopping_times[0].time - psi).abs() < 1e-3);
    }

    #[test]
    fn port_start_replays_physical_angles() {
        let strat = StrategyKind::ImpulseA { alpha: PI / 8.0, r0: 3.0 };
        let mut cfg = SimConfig::new(calm(0.1), strat, 1e-3);
        cfg.record_trajectory = true;
        let start = (PolarState::new(2.0, 0.6), Tack::Port);
        let (a, ta) = run(&cfg, start).unwrap();
        cfg.representation = Representation::Physical;
        let (b, tb) = run(&cfg, start).unwrap();
        assert_eq!(a.tacks, b.tacks);
        assert_abs_diff_eq!(a.tau, b.tau, epsilon = 1e-9);
        let (ta, tb) = (ta.unwrap(), tb.unwrap());
        assert_eq!(ta.records.len(), tb.records.len());
        for (x, y) in ta.records.iter().zip(&tb.records) {
            assert_eq!(x.tack, y.tack);
            assert_abs_diff_eq!(x.r, y.r, epsilon = 1e-9);
            assert_abs_diff_eq!(x.theta, y.theta, epsilon = 1e-9);
        }
    }

    #[test]
    fn trajectory_shape() {
        let strat = StrategyKind::ImpulseA { alpha: PI / 8.0, r0: 1.0 };
        let mut cfg = SimConfig::new(ModelParams::default(), strat, 1e-3);
        cfg.record_trajectory = true;
        let (res, tr) = run(&cfg, (PolarState::new(1.0, FRAC_PI_2), Tack::Starboard)).unwrap();
        let tr = tr.unwrap();
        assert!(tr.records.windows(2).all(|w| w[1].t > w[0].t));
        let hits = tr.records.iter().filter(|r| r.event == Event::Hit).count();
        assert_eq!(hits, usize::from(res.hit()));
        let tack_events = tr.records.iter().filter(|r| r.event.is_tack()).count();
        assert_eq!(tack_events as u32, res.tacks);
    }

    #[test]
    fn timeout_is_reported() {
        let strat = StrategyKind::ImpulseA { alpha: PI / 8.0, r0: 3.0 };
        let mut cfg = SimConfig::new(calm(0.1), strat, 1e-3);
        cfg.horizon = Some(0.5);
        let (res, _) = run(&cfg, (PolarState::new(2.0, FRAC_PI_2), Tack::Starboard)).unwrap();
        assert_eq!(res.terminated, Termination::Timeout);
        assert_abs_diff_eq!(res.tau, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(res.final_state.r, 1.5, epsilon = 1e-9);
    }

    #[test]
    fn invalid_start() {
        let cfg = SimConfig::new(calm(1.0), StrategyKind::FeedbackAStar, 1e-3);
        assert!(run(&cfg, (PolarState::new(0.5, 0.0), Tack::Port)).is_err());
    }

    #[test]
    fn calm_segments() {
        let seg = |reference: f64, max: f64, min: f64| Segment { reference, max, min };
        let alpha = 0.4;
        // wind leaves the band in segment 1 but settles afterwards
        let s = vec![seg(0.0, 0.5, 0.0), seg(0.5, 0.55, 0.45)];
        assert_eq!(first_calm_segment(&s, alpha), Some(2));
        let s = vec![seg(0.0, 0.1, -0.1), seg(0.05, 0.15, 0.0)];
        assert_eq!(first_calm_segment(&s, alpha), Some(1));
        let s = vec![seg(0.0, 0.1, -0.1), seg(0.05, 0.35, 0.0)];
        assert_eq!(first_calm_segment(&s, alpha), None);
    }

    #[test]
    fn e1_detector_on_scripted_winds() {
        let alpha = PI / 8.0;
        let strat = StrategyKind::ImpulseA { alpha, r0: 3.0 };
        let mut cfg = SimConfig::new(calm(0.1), strat, 1e-3);
        cfg.record_trajectory = true;
        let start = (PolarState::new(2.0, FRAC_PI_2), Tack::Starboard);
        let (_, tr) = run(&cfg, start).unwrap();
        assert!(detect_e1(&tr.unwrap(), alpha));
        for (dev, expect) in [(0.4, true), (0.6, false)] {
            cfg.wind = Some(WindSource::PiecewiseConstant {
                schedule: WindSchedule::new(vec![(0.0, 0.0), (0.5, dev * alpha)]).unwrap(),
            });
            let (res, tr) = run(&cfg, start).unwrap();
            assert_eq!(detect_e1(&tr.unwrap(), alpha), expect);
            assert_eq!(res.e1_first_index == Some(1), expect);
        }
    }
}
