//! Path-level invariants of the simulation engine.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use proptest::prelude::*;
use sailnav_core::analysis::run_batch;
use sailnav_core::dynamics::{ModelParams, PolarState, Tack};
use sailnav_core::engine::{
    extract_holding_times, run_path, Event, Representation, SimConfig, TackKind, Termination,
};
use sailnav_core::strategies::{classify_region, reduced_angle, ImpulseGeometry, StrategyKind};

const ALPHA: f64 = PI / 8.0;
const R0: f64 = 1.0;

fn impulse(sigma: f64, dt: f64) -> SimConfig {
    let model = ModelParams { sigma, v: 1.0, c: 0.5, eta: 0.1 };
    SimConfig::new(model, StrategyKind::ImpulseA { alpha: ALPHA, r0: R0 }, dt)
}

fn start_in_band() -> impl Strategy<Value = (f64, f64)> {
    (0.15f64..=R0, (FRAC_PI_2 - ALPHA)..=(FRAC_PI_2 + ALPHA))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn impulse_paths_stay_inside_the_outer_circle(
        (r, theta) in start_in_band(),
        sigma in 0.2f64..2.0,
        idx in 0u64..1000,
    ) {
        let cfg = impulse(sigma, 1e-3);
        let (res, _) = run_path(&cfg, (PolarState::new(r, theta), Tack::Starboard), idx).unwrap();
        prop_assert!(res.max_radius <= R0 + cfg.model.v * cfg.dt + 1e-12, "{}", res.max_radius);
        prop_assert!(!res.start_outside_disk);
    }

    #[test]
    fn tacks_land_outside_the_tacking_regions(
        (r, theta) in start_in_band(),
        sigma in 0.2f64..2.0,
        idx in 0u64..1000,
        physical in any::<bool>(),
    ) {
        let mut cfg = impulse(sigma, 1e-3);
        cfg.record_trajectory = true;
        if physical {
            cfg.representation = Representation::Physical;
        }
        let g = ImpulseGeometry::new(cfg.model.eta, ALPHA, R0).unwrap();
        let (_, traj) = run_path(&cfg, (PolarState::new(r, theta), Tack::Starboard), idx).unwrap();
        for rec in traj.unwrap().records.iter().filter(|rec| rec.event.is_tack()) {
            let region = classify_region(PolarState::new(rec.r, rec.theta), rec.tack, &g);
            prop_assert!(!region.is_tacking(), "{rec:?} lands in {region:?}");
        }
    }

    #[test]
    fn outer_tacks_happen_at_the_outer_circle(
        (r, theta) in start_in_band(),
        sigma in 0.5f64..2.0,
        idx in 0u64..1000,
    ) {
        let cfg = impulse(sigma, 1e-3);
        let (res, _) = run_path(&cfg, (PolarState::new(r, theta), Tack::Starboard), idx).unwrap();
        for st in res.stopping_times.iter().filter(|s| s.kind == TackKind::Rho) {
            prop_assert!((st.r - R0).abs() <= cfg.model.v * cfg.dt + 1e-12, "{st:?}");
        }
    }

    #[test]
    fn holding_times_add_up_to_the_hitting_time(
        (r, theta) in start_in_band(),
        sigma in 0.2f64..2.0,
        idx in 0u64..1000,
    ) {
        let cfg = impulse(sigma, 1e-3);
        let (res, _) = run_path(&cfg, (PolarState::new(r, theta), Tack::Starboard), idx).unwrap();
        let u = extract_holding_times(&res);
        prop_assert_eq!(u.len(), res.tacks as usize + 1);
        prop_assert!(u.iter().all(|x| *x >= 0.0));
        prop_assert!((u.iter().sum::<f64>() - res.tau).abs() <= 1e-9);
        prop_assert!((res.payoff - (res.tau + cfg.model.c * res.tacks as f64)).abs() <= 1e-9);
    }

    #[test]
    fn feedback_radius_shrinks_at_bounded_rate(
        r in 0.2f64..5.0,
        theta in -4.0f64..4.0,
        sigma in 0.0f64..3.0,
        idx in 0u64..1000,
    ) {
        let model = ModelParams { sigma, v: 1.0, c: 0.0, eta: 0.1 };
        let dt = 1e-3;
        let cfg = SimConfig::new(model, StrategyKind::FeedbackAStar, dt);
        let (res, _) = run_path(&cfg, (PolarState::new(r, theta), Tack::Starboard), idx).unwrap();
        prop_assert!(res.hit());
        prop_assert!(res.tau <= SQRT_2 * (r - model.eta) + 2.0 * dt);
        prop_assert!(res.dr_min >= -dt - 1e-12);
        prop_assert!(res.dr_max <= -FRAC_1_SQRT_2 * dt + 1e-12);
        prop_assert_eq!(res.payoff, res.tau);
    }

    #[test]
    fn port_starts_mirror_starboard_starts(
        (r, theta) in start_in_band(),
        idx in 0u64..1000,
    ) {
        // the tack mirror reverses orientation, so it couples with the negated wind
        let cfg = impulse(1.0, 1e-3);
        let mut mirror = cfg.clone();
        mirror.mirror_wind = true;
        let (a, _) = run_path(&cfg, (PolarState::new(r, theta), Tack::Starboard), idx).unwrap();
        let (b, _) = run_path(&mirror, (PolarState::new(r, FRAC_PI_2 - theta), Tack::Port), idx).unwrap();
        prop_assert!((a.tau - b.tau).abs() <= 1e-9, "{} vs {}", a.tau, b.tau);
        prop_assert_eq!(a.tacks, b.tacks);
    }
}

#[test]
fn calm_wind_never_crosses_past_the_tacking_line() {
    // without wind noise the reduced angle cannot pass −α by more than one step
    let dt = 1e-3;
    let mut cfg = impulse(0.0, dt);
    cfg.record_trajectory = true;
    for theta in [FRAC_PI_4 - 0.3, FRAC_PI_4, 1.0, FRAC_PI_2 + ALPHA] {
        let (res, traj) = run_path(&cfg, (PolarState::new(R0, theta), Tack::Starboard), 0).unwrap();
        assert!(res.hit());
        for rec in &traj.unwrap().records {
            let w = reduced_angle(rec.theta, rec.tack);
            let w = if w > PI { w - 2.0 * PI } else { w };
            assert!(w >= -ALPHA - dt / cfg.model.eta, "{rec:?}");
        }
    }
}

#[test]
fn paths_are_deterministic_and_order_free() {
    let cfg = impulse(1.0, 1e-3);
    let start = (PolarState::new(R0, FRAC_PI_2), Tack::Starboard);
    let batch = run_batch(&cfg, start, 64).unwrap();
    for i in [63u64, 0, 17] {
        let (res, _) = run_path(&cfg, start, i).unwrap();
        assert_eq!(res, batch[i as usize]);
    }
    let mut other = cfg.clone();
    other.seed += 1;
    let (a, _) = run_path(&other, start, 0).unwrap();
    assert_ne!(a.tau, batch[0].tau);
}

#[test]
fn short_horizon_times_out() {
    let mut cfg = impulse(1.0, 1e-3);
    cfg.horizon = Some(0.05);
    cfg.record_trajectory = true;
    let (res, traj) = run_path(&cfg, (PolarState::new(R0, FRAC_PI_2), Tack::Starboard), 0).unwrap();
    assert_eq!(res.terminated, Termination::Timeout);
    assert!((res.tau - 0.05).abs() <= 1e-9);
    assert_eq!(traj.unwrap().records.last().unwrap().event, Event::Timeout);
}

#[test]
fn start_inside_the_target_is_rejected() {
    let cfg = impulse(1.0, 1e-3);
    assert!(run_path(&cfg, (PolarState::new(0.05, 1.0), Tack::Starboard), 0).is_err());
}
