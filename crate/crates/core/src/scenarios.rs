//! Deterministic adversarial winds that keep the impulse strategy from ever
//! reaching the target.
//!
//! Both controllers watch the boat after every step and shift the wind
//! between steps. A shift of `Δ` rotates the boat's rotating-frame angle by
//! `Δ`; in the one-tack representation the starboard-equivalent angle moves
//! by `Δ` on starboard and by `−Δ` on port.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::dynamics::{ModelParams, PolarState, Tack};
use crate::engine::{
    run_controlled, ControlAction, Representation, SimConfig, StepView, TackKind, Trajectory, WindController,
};
use crate::strategies::{ImpulseGeometry, StrategyKind};
use crate::wind::WindSource;
use crate::{Error, Result};

/// Budget per cycle, in units of `r0/v`, before a scenario counts as stalled.
const CYCLE_BUDGET: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdversarialWind {
    ShiftTrap(AdversarialParams),
    NinetyDegree { margin: f64 },
}

/// Geometry of the shifting-wind scenario. The boat starts on starboard at
/// `(r0, alpha0)`; the wind is shifted by `beta` each time the boat sinks to
/// `beta` past the port layline, until the boat is pushed out to `r0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdversarialParams {
    pub r0: f64,
    pub alpha0: f64,
    /// The impulse strategy's `alpha`.
    pub alpha: f64,
    pub beta: f64,
    pub r1: f64,
    /// Cap on `beta` shifts per cycle; `None` shifts until the outer tack.
    pub shift_limit: Option<u32>,
}

impl AdversarialParams {
    /// Defaults: `alpha0 = π/4 − 0.02`, `r1 = 0.95·r0`, `beta = 0.75·alpha`.
    pub fn with_defaults(r0: f64, alpha: f64) -> Self {
        AdversarialParams {
            r0,
            alpha0: FRAC_PI_4 - 0.02,
            alpha,
            beta: 0.75 * alpha,
            r1: 0.95 * r0,
            shift_limit: None,
        }
    }

    pub fn validate(&self, eta: f64) -> Result<()> {
        ImpulseGeometry::new(eta, self.alpha, self.r0)?;
        if !(self.beta > 0.0 && self.beta < self.alpha) {
            return Err(Error::param("beta", format!("must lie in (0, alpha), got {}", self.beta)));
        }
        if !(self.r1 > eta && self.r1 < self.r0) {
            return Err(Error::param("r1", format!("must lie in (eta, r0), got {}", self.r1)));
        }
        if !(self.alpha0 > 0.0 && self.alpha0 < FRAC_PI_2 - self.alpha) {
            return Err(Error::param("alpha0", "must lie in (0, π/2 − alpha)"));
        }
        if !(self.r1 * self.alpha0.cos() > eta) {
            return Err(Error::param("r1", "the closest approach r1·cos(alpha0) must stay outside the target"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    /// Sailing down from the start towards radius `r1`.
    First,
    /// Starboard-equivalent leg below the port layline, shifting by `beta`.
    Shifting { shifts: u32 },
    /// Radial leg after the outer tack, waiting for radius `r1`.
    Inbound,
    /// The boat escaped the trap; no more shifts.
    Passive,
}

struct ShiftTrapController {
    p: AdversarialParams,
    target_cycles: u32,
    phase: Phase,
    alpha1: Option<f64>,
    gamma: Option<f64>,
    cycles: u32,
    gammas: Vec<f64>,
    shifts_per_cycle: Vec<u32>,
    tack_radii: Vec<f64>,
    /// Radius and starboard-equivalent angle after the previous step.
    prev: Option<(f64, f64)>,
    /// Radial drop per step on the inbound leg, `v·dt`.
    step_drop: f64,
}

fn physical_shift(reduced_delta: f64, tack: Tack) -> f64 {
    reduced_delta * tack.sign()
}

impl WindController for ShiftTrapController {
    fn after_step(&mut self, view: &StepView) -> ControlAction {
        let mut action = ControlAction::default();
        // the starboard-equivalent angle measured from the port layline
        let w = if view.reduced_theta > PI {
            view.reduced_theta - 2.0 * PI
        } else {
            view.reduced_theta
        };
        match self.phase {
            Phase::First => {
                if view.r <= self.p.r1 {
                    // angle where the straight leg crosses r1, between the last two steps
                    let alpha1 = match self.prev {
                        Some((r_prev, w_prev)) if r_prev > view.r => {
                            w_prev + (r_prev - self.p.r1) / (r_prev - view.r) * (w - w_prev)
                        }
                        _ => w,
                    };
                    self.alpha1 = Some(alpha1);
                    self.phase = Phase::Shifting { shifts: 0 };
                }
            }
            Phase::Shifting { shifts } => match view.tacked {
                Some(TackKind::Rho) => {
                    let before = view.reduced_theta_before_tack.unwrap_or(0.0);
                    let before = if before > PI { before - 2.0 * PI } else { before };
                    self.gamma = Some(-before);
                    self.gammas.push(-before);
                    self.shifts_per_cycle.push(shifts);
                    self.tack_radii.push(view.r);
                    self.phase = Phase::Inbound;
                }
                Some(TackKind::Nu) => {
                    self.shifts_per_cycle.push(shifts);
                    self.tack_radii.push(view.r);
                    self.phase = Phase::Passive;
                }
                None => {
                    let allowed = self.p.shift_limit.is_none_or(|m| shifts < m);
                    if allowed && w <= -self.p.beta && w > -FRAC_PI_4 - 1e-9 {
                        action.shift = Some(physical_shift(self.p.beta, view.tack));
                        self.phase = Phase::Shifting { shifts: shifts + 1 };
                    }
                }
            },
            Phase::Inbound => {
                // the inbound leg is radial, so re-aim on the last step at or above r1
                if view.r - self.step_drop < self.p.r1 {
                    let alpha1 = self.alpha1.unwrap_or(self.p.alpha0);
                    let gamma = self.gamma.unwrap_or(0.0);
                    // brings the starboard-equivalent angle from π/2 + γ back to α1
                    let reduced = alpha1 - (FRAC_PI_2 + gamma);
                    action.shift = Some(physical_shift(reduced, view.tack));
                    self.cycles += 1;
                    self.phase = Phase::Shifting { shifts: 0 };
                    if self.cycles >= self.target_cycles {
                        action.stop = true;
                    }
                }
            }
            Phase::Passive => {}
        }
        self.prev = Some((view.r, w));
        action
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftTrapReport {
    pub cycles_completed: u32,
    pub tacks: u32,
    pub target_hit: bool,
    pub alpha1: Option<f64>,
    /// Angle past the port layline at each outer tack.
    pub gammas: Vec<f64>,
    pub shifts_per_cycle: Vec<u32>,
    /// Radius at each tack.
    pub tack_radii: Vec<f64>,
    pub min_radius: f64,
    pub max_radius: f64,
    /// `r1·cos(alpha1)`.
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Radius stayed within `[lower_bound − v·dt, upper_bound + v·dt]`.
    pub confined: bool,
}

/// Runs the shifting-wind scenario for `cycles` cycles (or until the boat
/// reaches the target). Wind noise is off.
pub fn run_shift_trap(
    params: &ModelParams,
    adv: &AdversarialParams,
    cycles: u32,
    dt: f64,
) -> Result<(Trajectory, ShiftTrapReport)> {
    adv.validate(params.eta)?;
    if cycles == 0 {
        return Err(Error::param("cycles", "must be >= 1"));
    }
    let model = ModelParams { sigma: 0.0, ..*params };
    let mut cfg = SimConfig::new(model, StrategyKind::ImpulseA { alpha: adv.alpha, r0: adv.r0 }, dt);
    cfg.wind = Some(WindSource::Adversarial(AdversarialWind::ShiftTrap(*adv)));
    cfg.horizon = Some(CYCLE_BUDGET * adv.r0 / model.v * (cycles as f64 + 1.0));
    cfg.record_trajectory = true;
    let mut ctrl = ShiftTrapController {
        p: *adv,
        target_cycles: cycles,
        phase: Phase::First,
        alpha1: None,
        gamma: None,
        cycles: 0,
        gammas: Vec::new(),
        shifts_per_cycle: Vec::new(),
        tack_radii: Vec::new(),
        prev: None,
        step_drop: model.v * dt,
    };
    let start = (PolarState::new(adv.r0, adv.alpha0), Tack::Starboard);
    let (res, traj) = run_controlled(&cfg, start, 0, Some(&mut ctrl))?;
    let traj = traj.unwrap_or_default();
    let target_hit = res.hit();
    if !target_hit && ctrl.cycles < cycles {
        return Err(Error::ScenarioStalled(format!(
            "completed {} of {cycles} cycles before the time budget ran out",
            ctrl.cycles
        )));
    }
    let alpha1 = ctrl.alpha1;
    let lower_bound = adv.r1 * alpha1.unwrap_or(adv.alpha0).cos();
    let slack = model.v * dt;
    let confined = res.min_radius >= lower_bound - slack && res.max_radius <= adv.r0 + slack;
    let report = ShiftTrapReport {
        cycles_completed: ctrl.cycles,
        tacks: res.tacks,
        target_hit,
        alpha1,
        gammas: ctrl.gammas,
        shifts_per_cycle: ctrl.shifts_per_cycle,
        tack_radii: ctrl.tack_radii,
        min_radius: res.min_radius,
        max_radius: res.max_radius,
        lower_bound,
        upper_bound: adv.r0,
        confined,
    };
    Ok((traj, report))
}

struct NinetyController {
    enabled: bool,
    target_cycles: u32,
    cycles: u32,
    tack_radii: Vec<f64>,
}

impl WindController for NinetyController {
    fn after_step(&mut self, view: &StepView) -> ControlAction {
        let mut action = ControlAction::default();
        if view.tacked.is_some() {
            self.tack_radii.push(view.r);
            if self.enabled {
                // swing the wind so the new heading is antiparallel to the old one
                action.shift = Some(match view.tack {
                    Tack::Port => FRAC_PI_2,
                    Tack::Starboard => -FRAC_PI_2,
                });
                self.cycles += 1;
                action.stop = self.cycles >= self.target_cycles;
            }
        }
        action
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NinetyReport {
    pub cycles_completed: u32,
    pub tacks: u32,
    pub target_hit: bool,
    /// Radius at each tack.
    pub tack_radii: Vec<f64>,
    pub min_radius: f64,
    pub max_radius: f64,
    /// Radius at each tack is no smaller than at the previous one, up to `v·dt`.
    pub no_progress: bool,
}

/// Starboard boat just above the port layline; every tack is answered by a
/// quarter-turn wind shift that reverses its heading. The strategy is the
/// impulse strategy with `alpha = margin` and an outer circle far away.
pub fn run_ninety_degree_loop(
    params: &ModelParams,
    start_r: f64,
    margin: f64,
    cycles: u32,
    dt: f64,
    shifts_enabled: bool,
) -> Result<(Trajectory, NinetyReport)> {
    let r0 = 4.0 * start_r;
    ImpulseGeometry::new(params.eta, margin, r0)?;
    if !(start_r * margin.cos() > params.eta) {
        return Err(Error::param("start_r", "the loop would cut through the target"));
    }
    if cycles == 0 {
        return Err(Error::param("cycles", "must be >= 1"));
    }
    let model = ModelParams { sigma: 0.0, ..*params };
    let mut cfg = SimConfig::new(model, StrategyKind::ImpulseA { alpha: margin, r0 }, dt);
    cfg.representation = Representation::Physical;
    cfg.wind = Some(WindSource::Adversarial(AdversarialWind::NinetyDegree { margin }));
    cfg.horizon = Some(CYCLE_BUDGET * r0 / model.v * (cycles as f64 + 1.0));
    cfg.record_trajectory = true;
    let mut ctrl = NinetyController {
        enabled: shifts_enabled,
        target_cycles: cycles,
        cycles: 0,
        tack_radii: Vec::new(),
    };
    let start = (PolarState::new(start_r, margin), Tack::Starboard);
    let (res, traj) = run_controlled(&cfg, start, 0, Some(&mut ctrl))?;
    if shifts_enabled && !res.hit() && ctrl.cycles < cycles {
        return Err(Error::ScenarioStalled(format!(
            "completed {} of {cycles} cycles before the time budget ran out",
            ctrl.cycles
        )));
    }
    let slack = model.v * dt;
    let no_progress = ctrl.tack_radii.windows(2).all(|w| w[1] >= w[0] - slack);
    let report = NinetyReport {
        cycles_completed: ctrl.cycles,
        tacks: res.tacks,
        target_hit: res.hit(),
        tack_radii: ctrl.tack_radii,
        min_radius: res.min_radius,
        max_radius: res.max_radius,
        no_progress,
    };
    Ok((traj.unwrap_or_default(), report))
}
