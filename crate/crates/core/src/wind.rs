//! Wind-angle sources.
//!
//! The wind angle is kept unwrapped. A [`WindSource`] is immutable
//! configuration; [`WindSource::stream`] derives the per-path generator and
//! [`WindState`] carries the per-path running statistics.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::scenarios::AdversarialWind;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindSource {
    /// `σB_t`: Gaussian increments with variance `σ²·dt`.
    BrownianCircle { sigma: f64, seed: u64 },
    Constant { beta0: f64 },
    PiecewiseConstant { schedule: WindSchedule },
    /// Shifts are decided by a state-coupled controller (see [`crate::scenarios`]);
    /// the stream itself contributes no increments.
    Adversarial(AdversarialWind),
}

impl WindSource {
    /// Absolute wind angle at time 0.
    pub fn initial_angle(&self) -> f64 {
        match self {
            WindSource::Constant { beta0 } => *beta0,
            WindSource::PiecewiseConstant { schedule } => schedule.angle_at(0.0),
            _ => 0.0,
        }
    }

    /// Independent increment stream for one Monte Carlo path. Streams for
    /// different path indices never overlap and do not depend on the order in
    /// which they are created.
    pub fn stream(&self, path_index: u64) -> WindStream {
        let kind = match self {
            WindSource::BrownianCircle { sigma, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(path_index);
                StreamKind::Brownian {
                    rng,
                    sigma: *sigma,
                    sign: 1.0,
                }
            }
            WindSource::PiecewiseConstant { schedule } => StreamKind::Scripted(schedule.clone()),
            WindSource::Constant { .. } | WindSource::Adversarial(_) => StreamKind::Still,
        };
        WindStream { kind }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WindSource::BrownianCircle { sigma, .. } if !(sigma.is_finite() && *sigma >= 0.0) => {
                Err(Error::param("sigma", format!("must be >= 0, got {sigma}")))
            }
            WindSource::Constant { beta0 } if !beta0.is_finite() => {
                Err(Error::param("beta0", "must be finite"))
            }
            WindSource::PiecewiseConstant { schedule } => schedule.validate(),
            _ => Ok(()),
        }
    }
}

// one stream per path, so the inline RNG is cheaper than a box
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
enum StreamKind {
    Brownian {
        rng: ChaCha8Rng,
        sigma: f64,
        sign: f64,
    },
    Scripted(WindSchedule),
    Still,
}

/// Per-path increment generator.
#[derive(Debug, Clone)]
pub struct WindStream {
    kind: StreamKind,
}

impl WindStream {
    /// Same draws with every increment negated. Used for mirrored couplings.
    pub fn negated(mut self) -> Self {
        if let StreamKind::Brownian { sign, .. } = &mut self.kind {
            *sign = -*sign;
        }
        self
    }

    /// Draws the increment over `[state.t, state.t + dt]` and advances `state`.
    pub fn next_increment(&mut self, state: &mut WindState, dt: f64) -> f64 {
        let delta = match &mut self.kind {
            StreamKind::Brownian { rng, sigma, sign } => {
                let z: f64 = rng.sample(StandardNormal);
                *sign * *sigma * dt.sqrt() * z
            }
            StreamKind::Scripted(s) => s.angle_at(state.t + dt) - s.angle_at(state.t),
            StreamKind::Still => 0.0,
        };
        state.advance(delta, dt);
        delta
    }
}

/// Running wind statistics for one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindState {
    pub t: f64,
    /// Unwrapped wind angle.
    pub cumulative_angle: f64,
    /// Angle at the last reset of the calm tracker.
    pub reference_angle: f64,
    /// Sup of `|angle - reference_angle|` since the last reset.
    pub running_sup_deviation: f64,
}

impl WindState {
    pub fn new(initial_angle: f64) -> Self {
        WindState {
            t: 0.0,
            cumulative_angle: initial_angle,
            reference_angle: initial_angle,
            running_sup_deviation: 0.0,
        }
    }

    pub fn advance(&mut self, delta: f64, dt: f64) {
        self.t += dt;
        self.apply_shift(delta);
    }

    /// Instantaneous angle jump (no time passes).
    pub fn apply_shift(&mut self, delta: f64) {
        self.cumulative_angle += delta;
        let dev = (self.cumulative_angle - self.reference_angle).abs();
        if dev > self.running_sup_deviation {
            self.running_sup_deviation = dev;
        }
    }

    pub fn reset_calm_tracker(&mut self) {
        self.running_sup_deviation = 0.0;
        self.reference_angle = self.cumulative_angle;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulePoint {
    pub t: f64,
    pub angle_rad: f64,
}

/// Piecewise-constant absolute wind angles. Each angle holds from its start
/// time until the next entry; before the first entry the first angle applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WindSchedule {
    pub points: Vec<SchedulePoint>,
}

impl WindSchedule {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        let s = WindSchedule {
            points: points
                .into_iter()
                .map(|(t, angle_rad)| SchedulePoint { t, angle_rad })
                .collect(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::Malformed("wind schedule is empty".into()));
        }
        for p in &self.points {
            if !p.t.is_finite() || !p.angle_rad.is_finite() {
                return Err(Error::Malformed("wind schedule has a non-finite entry".into()));
            }
        }
        for w in self.points.windows(2) {
            if !(w[1].t > w[0].t) {
                return Err(Error::Malformed(format!(
                    "wind schedule times must be strictly increasing ({} then {})",
                    w[0].t, w[1].t
                )));
            }
        }
        Ok(())
    }

    pub fn angle_at(&self, t: f64) -> f64 {
        let k = self.points.partition_point(|p| p.t <= t);
        self.points[k.saturating_sub(1)].angle_rad
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let sched: WindSchedule = serde_json::from_str(s)?;
        sched.validate()?;
        Ok(sched)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// Cumulative wind path `σB` on the grid `0, dt, …, n·dt` for one path index.
pub fn sample_brownian_path(sigma: f64, seed: u64, path_index: u64, dt: f64, n: usize) -> Vec<f64> {
    let mut stream = WindSource::BrownianCircle { sigma, seed }.stream(path_index);
    let mut state = WindState::new(0.0);
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    for _ in 0..n {
        stream.next_increment(&mut state, dt);
        out.push(state.cumulative_angle);
    }
    out
}
