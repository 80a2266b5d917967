//! Tacking strategies and the region geometry of the impulse strategy.
//!
//! The impulse strategy tacks when the boat drifts past a layline by more
//! than `alpha` inside the disk of radius `r0`, or touches the disk boundary
//! while sailing away from the target. The feedback strategy always takes the
//! tack whose heading points closer to the target.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::dynamics::{a_star, tack_jump, wrap_angle, PolarState, Tack};
use crate::{Error, Result};

/// Largest admissible `alpha` for the impulse strategy.
pub const ALPHA_MAX: f64 = PI / 8.0;
/// Slack on [`ALPHA_MAX`] so that `π/8` typed to ten digits is accepted.
const ALPHA_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategyKind {
    ImpulseA { alpha: f64, r0: f64 },
    FeedbackAStar,
}

impl StrategyKind {
    pub fn validate(&self, eta: f64) -> Result<()> {
        match *self {
            StrategyKind::ImpulseA { alpha, r0 } => ImpulseGeometry::new(eta, alpha, r0).map(|_| ()),
            StrategyKind::FeedbackAStar => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::ImpulseA { .. } => "impulse-a",
            StrategyKind::FeedbackAStar => "a-star",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Hold,
    Tack,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionId {
    /// Starboard, inner tacking region (past the port layline by `alpha`).
    D1_1,
    /// Starboard, on the outer circle heading outwards.
    D1_2,
    /// Port, inner tacking region.
    Dm1_1,
    /// Port, on the outer circle.
    Dm1_2,
    C1,
    Cm1,
}

impl RegionId {
    pub fn is_tacking(self) -> bool {
        !matches!(self, RegionId::C1 | RegionId::Cm1)
    }

    pub fn is_outer(self) -> bool {
        matches!(self, RegionId::D1_2 | RegionId::Dm1_2)
    }
}

/// Parameters of the impulse strategy's regions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpulseGeometry {
    pub eta: f64,
    pub alpha: f64,
    pub r0: f64,
}

impl ImpulseGeometry {
    pub fn new(eta: f64, alpha: f64, r0: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= ALPHA_MAX + ALPHA_SLACK) {
            return Err(Error::param("alpha", format!("must lie in (0, π/8], got {alpha}")));
        }
        if !(r0.is_finite() && r0 > eta) {
            return Err(Error::param("r0", format!("must exceed eta = {eta}, got {r0}")));
        }
        Ok(ImpulseGeometry { eta, alpha, r0 })
    }

    /// Whether `s` lies in the start band `]eta, r0] × [π/2 − α, π/2 + α]`.
    pub fn in_start_band(&self, s: PolarState) -> bool {
        let w = wrap_angle(s.theta);
        s.r > self.eta && s.r <= self.r0 && (w - FRAC_PI_2).abs() <= self.alpha
    }
}

/// Region of `(s, tack)`. Radii at or beyond `r0` count as the outer circle,
/// so an Euler step that overshoots the circle still triggers the outer tack.
pub fn classify_region(s: PolarState, tack: Tack, g: &ImpulseGeometry) -> RegionId {
    let w = wrap_angle(s.theta);
    let a = g.alpha;
    match tack {
        Tack::Starboard => {
            if s.r >= g.r0 {
                if w <= 0.0 || w >= 3.0 * FRAC_PI_2 {
                    return RegionId::D1_2;
                }
            } else if s.r > g.eta && (w <= -a || w >= 3.0 * FRAC_PI_2 + a) {
                return RegionId::D1_1;
            }
            RegionId::C1
        }
        Tack::Port => {
            if s.r >= g.r0 {
                if (FRAC_PI_2..=PI).contains(&w) {
                    return RegionId::Dm1_2;
                }
            } else if s.r > g.eta && (FRAC_PI_2 + a..=PI - a).contains(&w) {
                return RegionId::Dm1_1;
            }
            RegionId::Cm1
        }
    }
}

pub fn decide_impulse_a(s: PolarState, tack: Tack, g: &ImpulseGeometry) -> Decision {
    if classify_region(s, tack, g).is_tacking() {
        Decision::Tack
    } else {
        Decision::Hold
    }
}

pub fn decide_a_star(s: PolarState) -> Tack {
    a_star(s.theta)
}

/// The payoff-preserving mirror `(r, θ, a) -> (r, π/2 − θ, −a)`. An involution
/// on wrapped angles.
pub fn mirror_tack(s: PolarState, tack: Tack) -> (PolarState, Tack) {
    (PolarState::new(s.r, tack_jump(s.theta)), tack.flipped())
}

/// The payoff-preserving reflection `θ -> 3π/2 − θ` about the line through the
/// target perpendicular to the wind (same tack).
pub fn mirror_layline(s: PolarState) -> PolarState {
    PolarState::new(s.r, wrap_angle(3.0 * FRAC_PI_2 - s.theta))
}

/// Maps a start to its starboard equivalent.
pub fn initial_reduction(s: PolarState, tack: Tack) -> (PolarState, Tack) {
    match tack {
        Tack::Starboard => (s, tack),
        Tack::Port => mirror_tack(s, tack),
    }
}

/// Angle of the starboard-equivalent state.
pub fn reduced_angle(theta: f64, tack: Tack) -> f64 {
    match tack {
        Tack::Starboard => wrap_angle(theta),
        Tack::Port => tack_jump(theta),
    }
}

/// The sector `[−π/4, 0] ∪ [3π/2, 7π/4)` just past the port layline, on a
/// wrapped starboard-equivalent angle.
pub fn past_port_layline(w: f64) -> bool {
    w <= 0.0 || w >= 3.0 * FRAC_PI_2
}
