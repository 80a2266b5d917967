//! Simulation and verification engine for a stochastic model of a sailboat
//! beating upwind towards a buoy under a randomly rotating wind.
//!
//! The boat lives in a frame that rotates with the wind: the target buoy sits
//! at the origin, the wind blows from the top of the picture, and the two
//! laylines are the coordinate axes. The wind angle is a Brownian motion on the
//! circle, so in this frame the boat position diffuses in angle while the
//! chosen tack sets its drift.
//!
//! Modules:
//! - [`wind`]: wind-angle increment sources (Brownian, constant, scripted).
//! - [`dynamics`]: drifts, closed-form solutions and coordinate maps.
//! - [`strategies`]: the impulse strategy with tacking regions and the
//!   feedback strategy that always sails the tack pointing closer to the target.
//! - [`engine`]: Euler–Maruyama time stepping with tack and target events.
//! - [`analysis`]: analytic bounds, Monte Carlo estimators and diagnostics.
//! - [`scenarios`]: deterministic adversarial wind controllers.
//! - [`io`]: trajectory CSV, results JSON and SVG output.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dynamics;
pub mod engine;
mod error;
pub mod io;
pub mod scenarios;
pub mod strategies;
pub mod wind;

pub use error::{Error, Result};
