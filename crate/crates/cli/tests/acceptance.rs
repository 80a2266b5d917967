//! Acceptance criteria. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits non-zero when any criterion fails. Tolerances are pinned below.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use std::process::{Command, ExitCode};

use sailnav_core::analysis::bounds::gamma;
use sailnav_core::analysis::{
    compute_bounds, convergence_study, estimate_from_results, estimate_stat, radial_regime_check, run_batch,
    symmetry_check, tail_from_results, ConvergenceSetup,
};
use sailnav_core::dynamics::{CartesianState, ModelParams, PolarState, Tack};
use sailnav_core::engine::{run, run_path, RunResult, SimConfig};
use sailnav_core::scenarios::{run_shift_trap, AdversarialParams};
use sailnav_core::strategies::StrategyKind;

/// Slack on exact-time criteria, in steps.
const TIME_SLACK_STEPS: f64 = 2.0;
/// Standard errors allowed on statistical criteria.
const Z: f64 = 3.0;
/// Float slack on per-step radial increments.
const STEP_TOL: f64 = 1e-12;
const C1SQ_C2SQ_TARGET: f64 = 0.72;
const C1SQ_C2SQ_TOL: f64 = 0.01;
const MIN_SLOPE: f64 = 0.4;
const RADIAL_TOL: f64 = 1e-12;
const MAX_TIMEOUT_FRACTION: f64 = 1e-3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

type Criterion = fn() -> Result<Outcome, String>;

fn impulse_setup() -> SimConfig {
    let model = ModelParams { sigma: 1.0, v: 1.0, c: 0.5, eta: 0.1 };
    SimConfig::new(model, StrategyKind::ImpulseA { alpha: PI / 8.0, r0: 1.0 }, 1e-3)
}

fn ac1() -> Result<Outcome, String> {
    let dt = 1e-4;
    let model = ModelParams { sigma: 0.0, v: 1.0, c: 0.0, eta: 1.0 };
    let cfg = SimConfig::new(model, StrategyKind::FeedbackAStar, dt);
    let (res, _) = run(&cfg, (PolarState::new(2.0, FRAC_PI_4), Tack::Starboard)).map_err(|e| e.to_string())?;
    let gap = (res.tau - SQRT_2).abs();
    Ok(outcome(
        res.hit() && gap <= TIME_SLACK_STEPS * dt,
        format!("tau = {:.8}, |tau - sqrt2| = {gap:.2e} (limit {:.0e})", res.tau, TIME_SLACK_STEPS * dt),
    ))
}

fn ac2() -> Result<Outcome, String> {
    let (r, dt, n) = (2.0, 1e-3, 10_000);
    let mut pass = true;
    let mut parts = Vec::new();
    for sigma in [0.5, 1.0, 2.0] {
        let model = ModelParams { sigma, v: 1.0, c: 0.0, eta: 0.1 };
        let cfg = SimConfig::new(model, StrategyKind::FeedbackAStar, dt);
        let results = run_batch(&cfg, (PolarState::new(r, 1.0), Tack::Starboard), n).map_err(|e| e.to_string())?;
        let bound = SQRT_2 * (r - model.eta) / model.v + TIME_SLACK_STEPS * dt;
        let late = results.iter().filter(|x| !x.hit() || x.tau > bound).count();
        let bad_steps = results
            .iter()
            .filter(|x| x.dr_min < -model.v * dt - STEP_TOL || x.dr_max > -FRAC_1_SQRT_2 * model.v * dt + STEP_TOL)
            .count();
        let max_tau = results.iter().map(|x| x.tau).fold(0.0, f64::max);
        pass &= late == 0 && bad_steps == 0;
        parts.push(format!("sigma={sigma}: max tau {max_tau:.4} <= {bound:.4}, {late} late, {bad_steps} bad-step paths"));
    }
    Ok(outcome(pass, parts.join("; ")))
}

fn impulse_batch() -> Result<Vec<RunResult>, String> {
    run_batch(&impulse_setup(), (PolarState::new(1.0, FRAC_PI_2), Tack::Starboard), 10_000).map_err(|e| e.to_string())
}

fn ac3() -> Result<Outcome, String> {
    let cfg = impulse_setup();
    let results = impulse_batch()?;
    let b = compute_bounds(&cfg.model, PI / 8.0, 1.0, 1.0).map_err(|e| e.to_string())?;
    let tau = estimate_stat(&results, |x| x.tau).map_err(|e| e.to_string())?;
    let tacks = estimate_stat(&results, |x| x.tacks as f64).map_err(|e| e.to_string())?;
    let ok_tau = tau.mean <= b.e_tau_bound + Z * tau.stderr;
    let ok_m = tacks.mean <= b.e_m_bound + Z * tacks.stderr;
    Ok(outcome(
        ok_tau && ok_m && tau.timeouts == 0,
        format!(
            "E[tau] {:.4} <= {:.3e}, E[M] {:.4} <= {:.3e} (p0 = {:.3e}, K = {:.4}, {} timeouts)",
            tau.mean, b.e_tau_bound, tacks.mean, b.e_m_bound, b.p0, b.k, tau.timeouts
        ),
    ))
}

fn ac4() -> Result<Outcome, String> {
    let cfg = impulse_setup();
    let results = impulse_batch()?;
    let b = compute_bounds(&cfg.model, PI / 8.0, 1.0, 1.0).map_err(|e| e.to_string())?;
    let mut pass = true;
    let mut worst = f64::NEG_INFINITY;
    for p in tail_from_results(&results, 10).into_iter().filter(|p| p.i >= 2) {
        let bound = (1.0 - b.p0).powi((p.i / 2) as i32);
        let excess = p.p_hat - bound - Z * p.stderr;
        worst = worst.max(excess);
        pass &= excess <= 0.0;
    }
    let p2 = tail_from_results(&results, 2)[2].p_hat;
    Ok(outcome(pass, format!("i = 2..10, P(psi_2 < tau) = {p2:.4}, worst excess {worst:.3e}")))
}

fn ac5() -> Result<Outcome, String> {
    let alpha = PI / 8.0;
    let model = ModelParams { sigma: 0.1, v: 1.0, c: 0.5, eta: 0.1 };
    let dt = 1e-3;
    let cfg = SimConfig::new(model, StrategyKind::ImpulseA { alpha, r0: 1.0 }, dt);
    let mut fired = 0;
    let mut total = 0;
    let mut violations = Vec::new();
    for r in [0.3, 0.55, 0.8, 1.0] {
        for theta in [FRAC_PI_2 - alpha, FRAC_PI_2 - 0.5 * alpha, FRAC_PI_2, FRAC_PI_2 + 0.5 * alpha, FRAC_PI_2 + alpha] {
            let results =
                run_batch(&cfg, (PolarState::new(r, theta), Tack::Starboard), 400).map_err(|e| e.to_string())?;
            let limit = gamma(r, model.eta, model.v, alpha);
            for x in &results {
                total += 1;
                if x.e1_first_index != Some(1) {
                    continue;
                }
                fired += 1;
                let ok = x.hit() && x.tau < limit && x.tacks <= 1 && x.max_radius <= r + model.v * dt;
                if !ok {
                    violations.push(format!("({r}, {theta:.4}): tau {:.4}, M {}, max r {:.6}", x.tau, x.tacks, x.max_radius));
                }
            }
        }
    }
    let first = violations.first().cloned().unwrap_or_default();
    Ok(outcome(
        fired > 0 && violations.is_empty(),
        format!("calm event on {fired} of {total} paths, {} violations {first}", violations.len()),
    ))
}

fn ac6() -> Result<Outcome, String> {
    let b = compute_bounds(&impulse_setup().model, PI / 8.0, 1.0, 1.0).map_err(|e| e.to_string())?;
    Ok(outcome(
        (b.c1sq_c2sq - C1SQ_C2SQ_TARGET).abs() <= C1SQ_C2SQ_TOL,
        format!(
            "c1^2 c2^2 = {:.4}, c1 c2 = {:.4} (below reference {}: {})",
            b.c1sq_c2sq, b.c1c2, b.c1c2_reference, b.c1c2_below_reference
        ),
    ))
}

fn ac7() -> Result<Outcome, String> {
    let rep = symmetry_check(&impulse_setup(), 1.0, FRAC_PI_2, 10_000).map_err(|e| e.to_string())?;
    Ok(outcome(
        rep.pass(),
        format!(
            "J = {:.4}; tack mirror diff {:+.4} (3se {:.4}); layline mirror diff {:+.4} (3se {:.4})",
            rep.base.mean,
            rep.tack_pair.difference,
            Z * rep.tack_pair.combined_stderr,
            rep.layline_pair.difference,
            Z * rep.layline_pair.combined_stderr
        ),
    ))
}

fn ac8() -> Result<Outcome, String> {
    let setup = ConvergenceSetup {
        sigma: 1.0,
        velocity: (0.0, -1.0),
        x0: CartesianState::new(1.0, 1.0),
        t_end: 1.0,
        n_paths: 200,
        seed: 7,
        refine: 10,
    };
    let table = convergence_study(&setup, &[1e-2, 1e-3, 1e-4]).map_err(|e| e.to_string())?;
    let params = ModelParams { sigma: 1.0, v: 1.0, c: 0.0, eta: 0.1 };
    let radial = radial_regime_check(&params, CartesianState::new(-1.0, 1.5), 10_000, 7).map_err(|e| e.to_string())?;
    let errs: Vec<String> = table.rows.iter().map(|r| format!("{:.2e}", r.rms_error)).collect();
    Ok(outcome(
        table.monotone && table.slope >= MIN_SLOPE && radial.max_radius_error <= RADIAL_TOL,
        format!(
            "rms errors [{}], slope {:.3}, radial error {:.1e}",
            errs.join(", "),
            table.slope,
            radial.max_radius_error
        ),
    ))
}

fn ac9() -> Result<Outcome, String> {
    let model = ModelParams { sigma: 0.0, v: 1.0, c: 0.5, eta: 0.1 };
    let dt = 1e-4;
    let adv = AdversarialParams::with_defaults(1.0, PI / 8.0);
    let (_, rep) = run_shift_trap(&model, &adv, 10, dt).map_err(|e| e.to_string())?;
    let scenario_ok = !rep.target_hit && rep.confined && rep.tacks >= 10;

    let cfg = impulse_setup();
    let results: Vec<RunResult> = (0..1000)
        .map(|i| run_path(&cfg, (PolarState::new(1.0, FRAC_PI_2), Tack::Starboard), i).map(|(r, _)| r))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let timeouts = results.iter().filter(|x| !x.hit()).count();
    let companion_ok = (timeouts as f64) < MAX_TIMEOUT_FRACTION * results.len() as f64;
    let hits = estimate_from_results(&results).map_err(|e| e.to_string())?.n;
    Ok(outcome(
        scenario_ok && companion_ok,
        format!(
            "scenario: hit {}, {} tacks, radius [{:.5}, {:.5}] within [{:.5}, {:.5}] +- v dt; companion: {hits} hits, {timeouts} timeouts",
            rep.target_hit, rep.tacks, rep.min_radius, rep.max_radius, rep.lower_bound, rep.upper_bound
        ),
    ))
}

fn montecarlo_json(workers: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_sailnav"))
        .args(["montecarlo", "--n", "2000", "--sigma", "1", "--seed", "11", "--workers", workers])
        .output()
        .map_err(|e| e.to_string())?;
    match out.status.code() {
        Some(0) | Some(1) => Ok(out.stdout),
        _ => Err(String::from_utf8_lossy(&out.stderr).into_owned()),
    }
}

fn ac10() -> Result<Outcome, String> {
    let a = montecarlo_json("1")?;
    let b = montecarlo_json("1")?;
    let c = montecarlo_json("8")?;
    Ok(outcome(
        !a.is_empty() && a == b && a == c,
        format!("{} bytes; repeat identical: {}; workers 1 vs 8 identical: {}", a.len(), a == b, a == c),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, Criterion); 10] = [
        ("AC1", "constant-wind exact time", ac1),
        ("AC2", "feedback strategy almost-sure bound", ac2),
        ("AC3", "expected time and tack bounds", ac3),
        ("AC4", "geometric tack tail", ac4),
        ("AC5", "calm-wind guarantee", ac5),
        ("AC6", "contraction constant", ac6),
        ("AC7", "mirror symmetry", ac7),
        ("AC8", "closed-form oracles", ac8),
        ("AC9", "adversarial confinement", ac9),
        ("AC10", "reproducibility", ac10),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        let o = f().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        let tag = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!("[{tag}] {id} {name}: {}", o.detail);
    }
    println!("acceptance: {} of 10 criteria pass", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
