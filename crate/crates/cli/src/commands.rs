//! Subcommand bodies. Each returns `Ok(false)` when a reported check fails.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde_json::{json, Value};

use sailnav_core::analysis::{
    astar_tau_bound, compute_bounds, convergence_study, estimate_from_results, estimate_stat, radial_regime_check,
    run_batch, tail_from_results, BoundsReport, ConvergenceSetup,
};
use sailnav_core::dynamics::{CartesianState, ModelParams, PolarState, Tack};
use sailnav_core::engine::{default_dt, run, Damping, RunResult, SimConfig, DEFAULT_SEED};
use sailnav_core::io::{read_trajectory_csv, render_svg, write_trajectory_csv, Check, Frame, PlotOptions, ResultsDoc};
use sailnav_core::scenarios::{run_shift_trap, run_ninety_degree_loop, AdversarialParams};
use sailnav_core::strategies::{StrategyKind, ALPHA_MAX};
use sailnav_core::wind::{WindSchedule, WindSource};

use crate::config::{pick, FileConfig};
use crate::{
    BoundsArgs, ConvergenceArgs, FrameName, ModelArgs, MontecarloArgs, PlotArgs, RunArgs, ScenarioArgs, ScenarioKind,
    SimulateArgs, StrategyArgs, StrategyName,
};

const DEFAULT_N: usize = 1000;
const DEFAULT_TAIL_MAX: usize = 10;
const DEFAULT_CYCLES: u32 = 10;
const DEFAULT_NINETY_MARGIN: f64 = 0.2;

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn write_csv(path: &Path, traj: &sailnav_core::engine::Trajectory, geographic: bool) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_trajectory_csv(BufWriter::new(f), traj, geographic)?;
    Ok(())
}

fn resolve_model(m: &ModelArgs, f: &FileConfig) -> Result<ModelParams> {
    let d = ModelParams::default();
    let p = ModelParams {
        sigma: pick(m.sigma, f.sigma, d.sigma),
        v: pick(m.v, f.v, d.v),
        c: pick(m.c, f.c, d.c),
        eta: pick(m.eta, f.eta, d.eta),
    };
    p.validate()?;
    Ok(p)
}

fn resolve_strategy(s: &StrategyArgs, f: &FileConfig) -> Result<StrategyKind> {
    let file_name = match &f.strategy {
        Some(name) => Some(StrategyName::from_str(name, true).map_err(|e| anyhow::anyhow!("config strategy: {e}"))?),
        None => None,
    };
    Ok(match pick(s.strategy, file_name, StrategyName::ImpulseA) {
        StrategyName::ImpulseA => StrategyKind::ImpulseA {
            alpha: pick(s.alpha, f.alpha, ALPHA_MAX),
            r0: pick(s.r0, f.r0, 1.0),
        },
        StrategyName::AStar => StrategyKind::FeedbackAStar,
    })
}

/// Simulation config, start state and the resolved settings as JSON.
fn resolve_run(
    model: &ModelArgs,
    strategy: &StrategyArgs,
    run: &RunArgs,
    f: &FileConfig,
) -> Result<(SimConfig, (PolarState, Tack), Value)> {
    let params = resolve_model(model, f)?;
    let kind = resolve_strategy(strategy, f)?;
    let r0 = match kind {
        StrategyKind::ImpulseA { r0, .. } => r0,
        StrategyKind::FeedbackAStar => pick(strategy.r0, f.r0, 1.0),
    };
    let r = pick(run.r, f.r, r0);
    let theta = pick(run.theta, f.theta, FRAC_PI_2);
    let tack = Tack::try_from(pick(run.tack, f.tack, 1)).map_err(anyhow::Error::msg)?;
    let dt = pick(run.dt, f.dt, default_dt(&kind, params.v, r));
    let mut cfg = SimConfig::new(params, kind, dt);
    cfg.seed = pick(run.seed, f.seed, DEFAULT_SEED);
    cfg.horizon = run.horizon.or(f.horizon);
    let damping_n = run.damping_n.or(f.damping_n);
    if let Some(n) = damping_n {
        cfg.damping = Damping::Linear { n };
    }
    let schedule_path = run.wind_schedule.clone().or_else(|| f.wind_schedule.clone());
    if let Some(p) = &schedule_path {
        cfg.wind = Some(WindSource::PiecewiseConstant { schedule: WindSchedule::load(p)? });
    }
    cfg.validate()?;
    let (alpha, r0_out) = match kind {
        StrategyKind::ImpulseA { alpha, r0 } => (Some(alpha), Some(r0)),
        StrategyKind::FeedbackAStar => (None, None),
    };
    let resolved = json!({
        "sigma": params.sigma,
        "v": params.v,
        "c": params.c,
        "eta": params.eta,
        "strategy": kind.name(),
        "alpha": alpha,
        "r0": r0_out,
        "r": r,
        "theta": theta,
        "tack": tack.as_i8(),
        "dt": dt,
        "horizon": cfg.resolved_horizon(r),
        "seed": cfg.seed,
        "damping_n": damping_n,
        "wind_schedule": schedule_path.map(|p| p.display().to_string()),
    });
    Ok((cfg, (PolarState::new(r, theta), tack), resolved))
}

fn insert(resolved: &mut Value, key: &str, value: Value) {
    if let Value::Object(map) = resolved {
        map.insert(key.to_string(), value);
    }
}

pub fn simulate(a: SimulateArgs) -> Result<bool> {
    let f = FileConfig::load(a.model.config.as_deref())?;
    let (mut cfg, start, mut resolved) = resolve_run(&a.model, &a.strategy, &a.run, &f)?;
    cfg.record_trajectory = true;
    cfg.record_stride = pick(a.record_stride, f.record_stride, 1);
    cfg.validate()?;
    insert(&mut resolved, "record_stride", json!(cfg.record_stride));
    let (res, traj) = run(&cfg, start)?;
    if let (Some(path), Some(traj)) = (&a.out, &traj) {
        write_csv(path, traj, a.geographic)?;
    }
    let summary = json!({
        "tau": res.tau,
        "tacks": res.tacks,
        "payoff": res.payoff,
        "terminated": res.terminated,
        "steps": res.steps,
        "final_state": res.final_state,
        "final_tack": res.final_tack,
        "resolved_config": resolved,
    });
    emit(None, &pretty(&summary)?)?;
    Ok(true)
}

fn impulse_checks(results: &[RunResult], b: &BoundsReport, tail_max: usize) -> Result<(Value, Vec<Check>)> {
    let tau = estimate_stat(results, |r| r.tau)?;
    let tacks = estimate_stat(results, |r| r.tacks as f64)?;
    let tail = tail_from_results(results, tail_max);
    let mut checks = vec![
        Check::new(
            "E_tau_bound",
            tau.mean <= b.e_tau_bound + 3.0 * tau.stderr,
            format!("mean tau {:.6} vs bound {:.6e} + 3·{:.2e}", tau.mean, b.e_tau_bound, tau.stderr),
        ),
        Check::new(
            "E_M_bound",
            tacks.mean <= b.e_m_bound + 3.0 * tacks.stderr,
            format!("mean tacks {:.6} vs bound {:.6e} + 3·{:.2e}", tacks.mean, b.e_m_bound, tacks.stderr),
        ),
    ];
    let mut worst = f64::NEG_INFINITY;
    for p in tail.iter().filter(|p| p.i >= 2) {
        let bound = (1.0 - b.p0).powi((p.i / 2) as i32);
        worst = worst.max(p.p_hat - bound - 3.0 * p.stderr);
    }
    if tail_max >= 2 {
        checks.push(Check::new(
            "tack_tail",
            worst <= 0.0,
            format!("largest excess of P(psi_i < tau) over (1-p0)^floor(i/2) + 3·se: {worst:.3e}"),
        ));
    }
    let estimate = json!({ "tau": tau, "tacks": tacks, "tail": tail });
    Ok((estimate, checks))
}

fn astar_checks(results: &[RunResult], cfg: &SimConfig, r: f64) -> Result<(Value, Vec<Check>)> {
    let tau = estimate_stat(results, |r| r.tau)?;
    let (v, dt) = (cfg.model.v, cfg.dt);
    let bound = astar_tau_bound(r, cfg.model.eta, v) + 2.0 * dt;
    let max_tau = results.iter().filter(|r| r.hit()).map(|r| r.tau).fold(f64::NEG_INFINITY, f64::max);
    let dr_min = results.iter().map(|r| r.dr_min).fold(f64::INFINITY, f64::min);
    let dr_max = results.iter().map(|r| r.dr_max).fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12;
    let checks = vec![
        Check::new(
            "astar_tau_bound",
            max_tau <= bound,
            format!("largest tau {max_tau:.6} vs {bound:.6}"),
        ),
        Check::new(
            "astar_radial_step",
            dr_min >= -v * dt - tol && dr_max <= -FRAC_1_SQRT_2 * v * dt + tol,
            format!("radial steps in [{dr_min:.6e}, {dr_max:.6e}]"),
        ),
    ];
    Ok((json!({ "tau": tau, "max_tau": max_tau }), checks))
}

pub fn montecarlo(a: MontecarloArgs) -> Result<bool> {
    let f = FileConfig::load(a.model.config.as_deref())?;
    let (cfg, start, mut resolved) = resolve_run(&a.model, &a.strategy, &a.run, &f)?;
    let n = pick(a.n, f.n, DEFAULT_N);
    if n < 2 {
        bail!("--n must be at least 2");
    }
    let tail_max = pick(a.tail_max, f.tail_max, DEFAULT_TAIL_MAX);
    insert(&mut resolved, "n", json!(n));
    insert(&mut resolved, "tail_max", json!(tail_max));
    if a.workers == Some(0) {
        bail!("--workers must be at least 1");
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(a.workers.unwrap_or(0)).build()?;
    let results = pool.install(|| run_batch(&cfg, start, n))?;

    let payoff = estimate_from_results(&results)?;
    let mut checks = vec![Check::new(
        "timeouts",
        payoff.healthy(),
        format!("{} of {n} paths timed out", payoff.timeouts),
    )];
    let (bounds, (detail, more)) = match cfg.strategy {
        StrategyKind::ImpulseA { alpha, r0 } => {
            if cfg.model.sigma > 0.0 {
                let b = compute_bounds(&cfg.model, alpha, r0, start.0.r)?;
                (serde_json::to_value(b)?, impulse_checks(&results, &b, tail_max)?)
            } else {
                let tacks = estimate_stat(&results, |r| r.tacks as f64)?;
                (Value::Null, (json!({ "tacks": tacks }), Vec::new()))
            }
        }
        StrategyKind::FeedbackAStar => (Value::Null, astar_checks(&results, &cfg, start.0.r)?),
    };
    checks.extend(more);
    let mut estimate = json!({ "payoff": payoff });
    if let (Value::Object(dst), Value::Object(src)) = (&mut estimate, detail) {
        dst.extend(src);
    }
    let doc = ResultsDoc {
        params: serde_json::to_value(cfg.model)?,
        strategy: cfg.strategy.name().to_string(),
        estimate,
        bounds,
        checks,
        resolved_config: resolved,
    };
    emit(a.out.as_deref(), &doc.to_json()?)?;
    Ok(doc.all_pass())
}

pub fn bounds(a: BoundsArgs) -> Result<bool> {
    let f = FileConfig::load(a.model.config.as_deref())?;
    let params = resolve_model(&a.model, &f)?;
    let alpha = pick(a.alpha, f.alpha, ALPHA_MAX);
    let r0 = pick(a.r0, f.r0, 1.0);
    let r = pick(a.r, f.r, r0);
    let report = compute_bounds(&params, alpha, r0, r)?;
    emit(None, &pretty(&serde_json::to_value(report)?)?)?;
    Ok(true)
}

pub fn scenario(a: ScenarioArgs) -> Result<bool> {
    let f = FileConfig::load(a.model.config.as_deref())?;
    let mut params = resolve_model(&a.model, &f)?;
    params.sigma = 0.0;
    let cycles = pick(a.cycles, f.cycles, DEFAULT_CYCLES);
    let r0 = pick(a.r0, f.r0, 1.0);
    let dt = pick(a.dt, f.dt, 1e-3 * r0 / params.v);
    let (traj, report, checks, resolved) = match a.kind {
        ScenarioKind::ShiftTrap => {
            let mut adv = AdversarialParams::with_defaults(r0, pick(a.alpha, f.alpha, ALPHA_MAX));
            adv.alpha0 = pick(a.alpha0, f.alpha0, adv.alpha0);
            adv.beta = pick(a.beta, f.beta, adv.beta);
            adv.r1 = pick(a.r1, f.r1, adv.r1);
            adv.shift_limit = a.shift_limit.or(f.shift_limit);
            let (traj, rep) = run_shift_trap(&params, &adv, cycles, dt)?;
            let checks = vec![
                Check::new("target_not_hit", !rep.target_hit, format!("{} cycles completed", rep.cycles_completed)),
                Check::new(
                    "confined",
                    rep.confined,
                    format!("radius in [{:.6}, {:.6}]", rep.min_radius, rep.max_radius),
                ),
                Check::new("tacks", rep.tacks >= cycles, format!("{} tacks", rep.tacks)),
            ];
            let resolved = json!({
                "kind": "shift-trap", "v": params.v, "c": params.c, "eta": params.eta, "adversary": adv,
                "cycles": cycles, "dt": dt,
            });
            (traj, serde_json::to_value(rep)?, checks, resolved)
        }
        ScenarioKind::Ninety => {
            let margin = pick(a.alpha, f.alpha, DEFAULT_NINETY_MARGIN);
            let shifts = !(a.no_shifts || f.no_shifts.unwrap_or(false));
            let (traj, rep) = run_ninety_degree_loop(&params, r0, margin, cycles, dt, shifts)?;
            let checks = if shifts {
                vec![
                    Check::new("target_not_hit", !rep.target_hit, format!("{} tacks", rep.tacks)),
                    Check::new("no_progress", rep.no_progress, "tack radii never shrink"),
                ]
            } else {
                vec![Check::new("target_hit", rep.target_hit, format!("{} tacks", rep.tacks))]
            };
            let resolved = json!({
                "kind": "ninety", "v": params.v, "c": params.c, "eta": params.eta, "r": r0, "margin": margin,
                "shifts": shifts, "cycles": cycles, "dt": dt,
            });
            (traj, serde_json::to_value(rep)?, checks, resolved)
        }
    };
    if let Some(path) = &a.out {
        write_csv(path, &traj, a.geographic)?;
    }
    let pass = checks.iter().all(|c| c.pass);
    let doc = json!({ "report": report, "checks": checks, "resolved_config": resolved });
    emit(None, &pretty(&doc)?)?;
    Ok(pass)
}

pub fn convergence(a: ConvergenceArgs) -> Result<bool> {
    let f = FileConfig::load(a.config.as_deref())?;
    let sigma = pick(a.sigma, f.sigma, 1.0);
    let v = pick(a.v, f.v, 1.0);
    let dts = pick(a.dts, f.dts.clone(), vec![1e-2, 1e-3, 1e-4]);
    let setup = ConvergenceSetup {
        sigma,
        velocity: (0.0, -v),
        x0: CartesianState::new(1.0, 1.0),
        t_end: pick(a.t_end, f.t_end, 1.0),
        n_paths: pick(a.n, f.n, 200),
        seed: pick(a.seed, f.seed, DEFAULT_SEED),
        refine: pick(a.refine, f.refine, 10),
    };
    let table = convergence_study(&setup, &dts)?;
    let radial_steps = pick(a.radial_steps, f.radial_steps, 10_000);
    let radial_params = ModelParams { sigma, v, c: 0.0, eta: 0.1 };
    let radial = radial_regime_check(&radial_params, CartesianState::new(-1.0, 1.5), radial_steps, setup.seed)?;
    let checks = vec![
        Check::new("monotone", table.monotone, "RMS error decreases with the step"),
        Check::new("slope", table.slope >= 0.4, format!("log-log slope {:.4}", table.slope)),
        Check::new(
            "radial",
            radial.max_radius_error <= 1e-12,
            format!("largest radius error {:.3e}", radial.max_radius_error),
        ),
    ];
    let pass = checks.iter().all(|c| c.pass);
    let doc = json!({
        "table": table,
        "radial": radial,
        "checks": checks,
        "resolved_config": { "setup": setup, "dts": dts, "radial_steps": radial_steps },
    });
    emit(None, &pretty(&doc)?)?;
    Ok(pass)
}

pub fn plot(a: PlotArgs) -> Result<bool> {
    let file = File::open(&a.input).with_context(|| format!("opening {}", a.input.display()))?;
    let traj = read_trajectory_csv(file)?;
    if !(a.eta >= 0.0 && a.size > 0.0) {
        bail!("--eta must be >= 0 and --size > 0");
    }
    let opts = PlotOptions {
        frame: match a.frame {
            FrameName::Rotating => Frame::Rotating,
            FrameName::Geographic => Frame::Geographic,
        },
        eta: a.eta,
        size: a.size,
    };
    emit(a.out.as_deref(), &render_svg(&traj, &opts))?;
    Ok(true)
}
