use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use grating_cli::commands::{self, Options};
use grating_cli::output::read_csv;
use grating_cli::RunConfig;
use proptest::prelude::*;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_grating"))
}

/// One small circle, band below the first anomaly.
fn small_config(dir: &Path, grid_points: usize) -> PathBuf {
    let text = format!(
        r#"{{
  "geometry": {{"L": 4.0, "theta_degrees": 90.0,
                "scatterers": [{{"cx": 2.0, "cy": 0.0, "r": 0.75, "elements": 32}}]}},
  "band": {{"omega_min": 0.2, "omega_max": 1.4}},
  "pade": {{"M": 2, "N": 2, "eps_T": 1e-3}},
  "reference": {{"panels": 4, "points_per_panel": 3}},
  "output": {{"grid_points": {grid_points}}}
}}"#
    );
    let path = dir.join("run.json");
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn without_wall_time(mut v: Value) -> Value {
    let obj = v.as_object_mut().unwrap();
    obj.remove("wall_time_seconds");
    v
}

#[test]
fn sweep_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 50);
    let (csv, json) = (dir.path().join("s.csv"), dir.path().join("s.json"));
    let out = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out-csv", csv.to_str().unwrap(), "--out-json", json.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let head = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(head.lines().next().unwrap(), "omega,T,R,subband_index,is_center");
    let rows = read_csv(&csv).unwrap();
    let v = read_json(&json);
    let centres = v["partition"]["centres"].as_array().unwrap().len();
    assert_eq!(rows.len(), 50 + centres);
    assert_eq!(rows.iter().filter(|r| r.is_center).count(), centres);
    assert!(rows.windows(2).all(|w| w[0].omega <= w[1].omega));
    for key in ["partition", "models", "J", "contributions", "warnings", "solves", "wall_time_seconds", "wall_time_note"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let model = &v["models"][0]["transmitted"][0];
    for key in ["centre", "M", "N", "p", "q", "poles"] {
        assert!(model.get(key).is_some(), "model lacks {key}");
    }
    let j = v["J"].as_f64().unwrap();
    assert!(j > 0.0 && j <= 1.0 + 1e-9, "{j}");
    let sum: f64 = v["contributions"].as_array().unwrap().iter().map(|c| c.as_f64().unwrap()).sum();
    assert!((sum - j).abs() < 1e-12);
}

#[test]
fn csv_values_match_memory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::load(&small_config(dir.path(), 30)).unwrap();
    let (_, rows) = commands::run_sweep(&cfg, "sweep", true).unwrap();
    let path = dir.path().join("x.csv");
    commands::write_csv(Some(&path), &rows).unwrap();
    let back = read_csv(&path).unwrap();
    assert_eq!(back.len(), rows.len());
    for (a, b) in rows.iter().zip(&back) {
        for (x, y) in [(a.omega, b.omega), (a.t, b.t), (a.r, b.r)] {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300), "{x} vs {y}");
        }
        assert_eq!((a.subband, a.is_center), (b.subband, b.is_center));
    }
}

#[test]
fn zero_grid_points_gives_json_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 0);
    let (csv, json) = (dir.path().join("s.csv"), dir.path().join("s.json"));
    let out = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out-csv", csv.to_str().unwrap(), "--out-json", json.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(json.exists());
    assert!(!csv.exists());
}

#[test]
fn repeated_runs_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 40);
    let mut outputs = Vec::new();
    for k in 0..2 {
        let (csv, json) = (dir.path().join(format!("{k}.csv")), dir.path().join(format!("{k}.json")));
        let out = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out-csv", csv.to_str().unwrap(), "--out-json", json.to_str().unwrap()]);
        assert!(out.status.success());
        outputs.push((std::fs::read(&csv).unwrap(), without_wall_time(read_json(&json))));
    }
    assert_eq!(outputs[0].0, outputs[1].0);
    assert_eq!(outputs[0].1, outputs[1].1);
}

#[test]
fn reference_csv_shares_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 10);
    let (csv, json) = (dir.path().join("r.csv"), dir.path().join("r.json"));
    let out = run(&["reference", "--config", cfg.to_str().unwrap(), "--out-csv", csv.to_str().unwrap(), "--out-json", json.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "omega,T,R,subband_index,is_center");
    let rows = read_csv(&csv).unwrap();
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| !r.is_center && r.subband < 4));
    assert!(rows.iter().all(|r| (r.t + r.r - 1.0).abs() < 1e-2));
    let v = read_json(&json);
    assert_eq!(v["solves"], 12);
    // Sweep and reference agree on this smooth band.
    let sweep = commands::average(&RunConfig::load(&cfg).unwrap(), &Options::default()).unwrap();
    assert!((v["J"].as_f64().unwrap() - sweep.j).abs() < 5e-3);
}

#[test]
fn config_output_paths_are_used() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 5);
    let mut v = read_json(&cfg);
    v["output"]["csv_path"] = dir.path().join("c.csv").to_str().unwrap().into();
    v["output"]["json_path"] = dir.path().join("c.json").to_str().unwrap().into();
    std::fs::write(&cfg, v.to_string()).unwrap();
    let out = run(&["average", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("J = "));
    // average writes no curve
    assert!(!dir.path().join("c.csv").exists());
    assert_eq!(read_json(&dir.path().join("c.json"))["command"], "average");
}

#[test]
fn solve_prints_the_indicator_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 5);
    let json = dir.path().join("s.json");
    let out = run(&["solve", "--config", cfg.to_str().unwrap(), "--omega", "0.9", "--order", "3", "--out-json", json.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().count(), 2 + 4);
    let v = read_json(&json);
    let t = v["T"][0].as_f64().unwrap();
    let r = v["R"][0].as_f64().unwrap();
    assert!((t + r - 1.0).abs() < 1e-2);
    assert_eq!(v["e"].as_array().unwrap().len(), 4);
}

#[test]
fn empty_grating_is_transparent() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.json");
    std::fs::write(&path, r#"{"geometry": {"L": 4, "theta_degrees": 60, "scatterers": []}, "band": {"omega_min": 0.1, "omega_max": 1}}"#).unwrap();
    let cfg = RunConfig::load(&path).unwrap();
    let rep = commands::solve(&cfg, &Options { omega: Some(0.7), order: Some(4), ..Options::default() }).unwrap();
    assert_eq!(rep.t[0], 1.0);
    assert_eq!(rep.r[0], 0.0);
    assert!(rep.e.iter().all(|e| *e == Some(0.0)));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 5);
    let c = cfg.to_str().unwrap();
    // missing file, bad JSON, unknown key, bad value, missing --omega
    assert_eq!(run(&["sweep", "--config", "/nonexistent/x.json"]).status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run(&["sweep", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    let mut v = read_json(&cfg);
    v["band"]["colour"] = "red".into();
    std::fs::write(&bad, v.to_string()).unwrap();
    assert_eq!(run(&["sweep", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    let mut v = read_json(&cfg);
    v["geometry"]["theta_degrees"] = 95.0.into();
    std::fs::write(&bad, v.to_string()).unwrap();
    assert_eq!(run(&["sweep", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--config", c]).status.code(), Some(2));
    assert_eq!(run(&["greens", "--config", c, "--case", "7"]).status.code(), Some(2));
    assert_eq!(run(&["sweep"]).status.code(), Some(2));
    // a solve exactly on the first Rayleigh anomaly: numerical failure with a report
    let json = dir.path().join("err.json");
    let out = run(&["solve", "--config", c, "--omega", &std::f64::consts::FRAC_PI_2.to_string(), "--out-json", json.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let report: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(report["kind"], "numerical");
    assert_eq!(report["exit_code"], 3);
    assert_eq!(read_json(&json), report);
}

#[test]
fn greens_custom_uses_the_config_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    std::fs::write(
        &path,
        r#"{"geometry": {"L": 2.2, "theta_degrees": 60, "scatterers": []},
            "band": {"omega_min": 1, "omega_max": 2},
            "ewald": {"mode": "adaptive", "trunc_rel_tol": 1e-16, "H": 9, "K": 13, "eps": 1e-16}}"#,
    )
    .unwrap();
    let cfg = RunConfig::load(&path).unwrap();
    let custom = commands::greens(&cfg, &Options { omega: Some(8.3), ..Options::default() }).unwrap();
    let case3 = commands::greens(&cfg, &Options { case: Some(3), ..Options::default() }).unwrap();
    assert_eq!(custom.order, 6);
    for i in 0..=6 {
        for k in 0..2 {
            let (a, b) = (custom.gp2[i][k], case3.gp2[i][k]);
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-12), "{i}: {a} vs {b}");
        }
    }
}

fn config_strategy() -> impl Strategy<Value = RunConfig> {
    (
        0.5f64..10.0,
        1.0f64..90.0,
        prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0, 0.01f64..0.2, 3usize..300), 0..4),
        0.0f64..3.0,
        0.01f64..3.0,
        1usize..6,
        0usize..6,
        prop::option::of("[a-z]{1,8}\\.csv"),
        0usize..1000,
    )
        .prop_map(|(l, theta, sc, w0, width, m, n, csv, grid)| {
            let scatterers = sc
                .into_iter()
                .enumerate()
                .map(|(i, (cx, cy, r, elements))| grating_cli::config::Scatterer { cx: cx + 20.0 * i as f64, cy, r, elements })
                .collect();
            let mut cfg: RunConfig = serde_json::from_value(serde_json::json!({
                "geometry": {"L": l, "theta_degrees": theta, "scatterers": []},
                "band": {"omega_min": w0, "omega_max": w0 + width},
            }))
            .unwrap();
            cfg.geometry.scatterers = scatterers;
            cfg.pade.m = m;
            cfg.pade.n = n;
            cfg.output.csv_path = csv.map(PathBuf::from);
            cfg.output.grid_points = grid;
            cfg
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trips(cfg in config_strategy()) {
        let text = cfg.to_json();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_json(), text);
    }
}
