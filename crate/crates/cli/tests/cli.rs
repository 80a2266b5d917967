use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sailnav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sailnav")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_constant_wind_from_the_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let out = sailnav(&[
        "simulate", "--strategy", "a-star", "--r", "2", "--theta", "0.7853981634", "--sigma", "0", "--v", "1",
        "--eta", "1", "--dt", "1e-4", "--out", path_str(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let tau = v["tau"].as_f64().unwrap();
    assert!((tau - 2f64.sqrt()).abs() <= 2e-4, "{tau}");
    assert_eq!(v["terminated"], "hit");
    assert_eq!(v["resolved_config"]["strategy"], "a-star");

    let before = std::fs::read(&csv).unwrap();
    let text = String::from_utf8(before.clone()).unwrap();
    assert!(text.starts_with("t,r,theta,x,y,tack,wind_angle,event\n"));
    assert!(text.trim_end().ends_with(",hit"));

    // plotting reads the CSV and never rewrites it
    let svg = dir.path().join("traj.svg");
    for frame in ["rotating", "geographic"] {
        let out = sailnav(&["plot", "--input", path_str(&csv), "--frame", frame, "--eta", "1", "--out", path_str(&svg)]);
        assert_eq!(out.status.code(), Some(0));
        let drawing = std::fs::read_to_string(&svg).unwrap();
        assert!(drawing.contains("<polyline"));
        assert!(drawing.contains(r#"class="target""#));
    }
    assert_eq!(std::fs::read(&csv).unwrap(), before);
}

#[test]
fn geographic_columns_are_optional() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let out = sailnav(&["simulate", "--sigma", "1", "--record-stride", "10", "--geographic", "--out", path_str(&csv)]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,r,theta,x,y,tack,wind_angle,event,xi1,xi2\n"));
}

#[test]
fn bounds_report() {
    let out = sailnav(&[
        "bounds", "--sigma", "1", "--v", "1", "--eta", "0.1", "--c", "0.5", "--alpha", "0.3926990817", "--r0", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    for key in ["K", "p0", "E_tau_bound", "E_M_bound", "c1sq_c2sq", "c1c2_below_reference", "Gamma_r"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!((v["c1sq_c2sq"].as_f64().unwrap() - 0.721).abs() < 1e-3);
}

#[test]
fn montecarlo_reports_checks() {
    let out = sailnav(&["montecarlo", "--strategy", "impulse-a", "--n", "300", "--workers", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let checks = v["checks"].as_array().unwrap();
    let names: Vec<&str> = checks.iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["timeouts", "E_tau_bound", "E_M_bound", "tack_tail"]);
    assert_eq!(v["strategy"], "impulse-a");
    assert_eq!(v["resolved_config"]["n"], 300);
    assert!(v["resolved_config"].get("workers").is_none());
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"n": 40, "seed": 5, "sigma": 0.5, "strategy": "a-star", "r": 2.0}"#).unwrap();
    let out = sailnav(&["montecarlo", "--config", path_str(&cfg), "--n", "30"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out)["resolved_config"].clone();
    assert_eq!(r["n"], 30);
    assert_eq!(r["seed"], 5);
    assert_eq!(r["sigma"], 0.5);
    assert_eq!(r["strategy"], "a-star");
}

#[test]
fn check_failures_exit_with_one() {
    // a horizon near the mean hitting time leaves far more than 0.1% of paths unfinished
    let out = sailnav(&["montecarlo", "--n", "200", "--horizon", "1.0"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["checks"][0]["name"], "timeouts");
    assert_eq!(v["checks"][0]["pass"], false);
}

#[test]
fn usage_and_domain_errors_exit_with_two() {
    assert_eq!(sailnav(&["simulate", "--bogus"]).status.code(), Some(2));
    assert_eq!(sailnav(&["simulate", "--eta", "-1"]).status.code(), Some(2));
    assert_eq!(sailnav(&["simulate", "--alpha", "1.0"]).status.code(), Some(2));
    assert_eq!(sailnav(&["simulate", "--tack", "0"]).status.code(), Some(2));
    assert_eq!(sailnav(&["montecarlo", "--workers", "0"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"sigmaa": 1}"#).unwrap();
    assert_eq!(sailnav(&["bounds", "--config", path_str(&cfg)]).status.code(), Some(2));
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "t,r\n1,2\n").unwrap();
    assert_eq!(sailnav(&["plot", "--input", path_str(&bad)]).status.code(), Some(2));
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(sailnav(&["--help"]).status.code(), Some(0));
}

#[test]
fn scenarios_run() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("loop.csv");
    let out = sailnav(&["scenario", "shift-trap", "--cycles", "2", "--out", path_str(&csv)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["target_hit"], false);
    assert!(std::fs::read_to_string(&csv).unwrap().contains(",wind_shift"));

    let out = sailnav(&["scenario", "ninety", "--cycles", "4", "--dt", "1e-4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["report"]["tacks"], 4);
}

#[test]
fn convergence_table() {
    let out = sailnav(&["convergence", "--n", "20", "--dts", "0.01,0.001", "--refine", "5", "--radial-steps", "100"]);
    assert!(matches!(out.status.code(), Some(0) | Some(1)));
    let v = json(&out);
    assert_eq!(v["table"]["rows"].as_array().unwrap().len(), 2);
    assert!(v["radial"]["max_radius_error"].as_f64().unwrap() < 1e-12);
}

#[test]
fn empty_trajectory_plots_target_only() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    std::fs::write(&csv, "t,r,theta,x,y,tack,wind_angle,event\n").unwrap();
    let out = sailnav(&["plot", "--input", path_str(&csv)]);
    assert_eq!(out.status.code(), Some(0));
    let svg = String::from_utf8(out.stdout).unwrap();
    assert!(svg.contains(r#"class="target""#));
    assert!(!svg.contains("<polyline"));
}
