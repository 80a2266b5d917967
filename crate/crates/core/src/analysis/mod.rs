//! Analytic bounds, Monte Carlo estimators and statistical diagnostics.

pub mod bounds;
pub mod convergence;
pub mod diagnostics;
pub mod montecarlo;

pub use bounds::{astar_tau_bound, compute_bounds, strip_stay_prob, BoundsReport};
pub use convergence::{convergence_study, radial_regime_check, ConvergenceSetup, ConvergenceTable};
pub use diagnostics::{martingale_diagnostic, symmetry_check, SymmetryReport};
pub use montecarlo::{
    estimate_from_results, estimate_payoff, estimate_stat, run_batch, tack_tail_distribution, tail_from_results,
    McEstimate,
};
