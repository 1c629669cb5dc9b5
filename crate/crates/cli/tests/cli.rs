use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn twophoton(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twophoton"))
        .args(args)
        .env_remove("TWOPHOTON_WORKERS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Value {
    let out = twophoton(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON object")
}

fn error_json(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().last().expect("stderr is not empty");
    serde_json::from_str(line).expect("last stderr line is JSON")
}

/// Rows of a CSV as floats, header dropped. Empty fields become NaN.
fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            l.split(',')
                .map(|f| match f {
                    "true" => 1.0,
                    "false" => 0.0,
                    "" => f64::NAN,
                    x => x.parse().unwrap(),
                })
                .collect()
        })
        .collect()
}

fn manifest(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn evolve_both_backends_reach_resonant_amplitude() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "evolve",
        "--g",
        "20",
        "--delta",
        "0",
        "--backends",
        "master,meanfield",
        "--out",
        out,
    ]);
    for name in ["evolve_master.csv", "evolve_meanfield.csv"] {
        let r = rows(&dir.path().join(name));
        assert_eq!(r.len(), 400);
        let last = r.last().unwrap();
        assert_eq!(last[0], 10.0);
        assert!((last[3] - 10.0).abs() < 1e-3, "{name}: {}", last[3]);
    }
    let m = manifest(dir.path(), "evolve.json");
    assert_eq!(m["schema_version"], "1.0.0");
    assert_eq!(m["config"]["task"]["master"]["rel_tol"], 1e-8);
    assert_eq!(m["config"]["task"]["master"]["samples"], 400);
    assert_eq!(m["summary"]["trajectories"][1]["source"], "meanfield");
}

#[test]
fn zero_pump_trajectories_are_flat() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "evolve",
        "--g",
        "0",
        "--t-max",
        "2",
        "--samples",
        "5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    for name in ["evolve_master.csv", "evolve_meanfield.csv"] {
        for r in rows(&dir.path().join(name)) {
            assert_eq!(&r[1..5], &[0.0, 0.0, 0.0, 0.0]);
        }
    }
}

#[test]
fn small_cutoff_exits_with_truncation_code_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("run");
    let out = twophoton(&[
        "evolve",
        "--g",
        "20",
        "--delta",
        "0",
        "--cutoff",
        "12",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    let e = error_json(&out);
    assert_eq!(e["error"]["kind"], "truncation");
    assert_eq!(e["error"]["exit_code"], 4);
    assert!(!target.exists());
}

#[test]
fn invalid_configurations_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for args in [
        vec!["steady", "--g", "-1"],
        vec!["steady", "--g", "1", "--gamma", "0"],
        vec!["exponent", "--points", "3"],
        vec!["sweep", "--g-range", "0:1"],
        vec!["sweep", "--g-range", "2:1:0.1"],
        vec!["threshold", "--g-range", "1", "--delta-range", "0:1:0.1"],
        vec!["evolve", "--g", "1", "--cutoff", "2"],
        vec!["evolve", "--g", "1", "--rel-tol", "0"],
        vec!["curvature", "--g-range", "0:1:0.5"],
    ] {
        let mut a = args.clone();
        a.extend(["--out", out]);
        let o = twophoton(&a);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert_eq!(error_json(&o)["error"]["exit_code"], 2, "{args:?}");
    }
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn convergence_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = twophoton(&[
        "steady",
        "--g",
        "5",
        "--method",
        "evolve",
        "--t-cap",
        "0.01",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_json(&o)["error"]["kind"], "convergence");
}

#[test]
fn meanfield_threshold_example() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok(&[
        "threshold",
        "--backend",
        "meanfield",
        "--g-range",
        "0.5:3:0.02",
        "--delta-range",
        "0:2:0.02",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let g_th = v["summary"]["g_th"].as_f64().unwrap();
    assert!((g_th - 1.0).abs() <= 0.02, "{g_th}");
    let chi = rows(&dir.path().join("susceptibility.csv"));
    assert_eq!(chi.len(), 101 * 126);
    assert!(chi.iter().all(|r| r[3] <= 1.0 + 1e-15));
}

#[test]
fn meanfield_exponent_example() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok(&[
        "exponent",
        "--backend",
        "meanfield",
        "--window",
        "20:200",
        "--points",
        "12",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let d = v["summary"]["delta_exponent"].as_f64().unwrap();
    assert!((d - 2.0).abs() <= 0.02, "{d}");
    assert_eq!(rows(&dir.path().join("exponent.csv")).len(), 12);
}

#[test]
fn master_cross_section_at_fixed_pump() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "sweep",
        "--backend",
        "master",
        "--g",
        "20",
        "--delta-range",
        "0:30:0.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let r = rows(&dir.path().join("sweep.csv"));
    assert_eq!(r.len(), 61);
    assert!(r.iter().all(|row| row[4] == 1.0 && row[1] == 20.0));
    // Resonant value, then a tail that decays past delta = g.
    assert!((r[0][2] - 10.0).abs() < 1e-3);
    assert!(r[60][2] > 0.1 && r[60][2] < r[42][2]);
}

#[test]
fn replay_reproduces_csv_bytes() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    ok(&[
        "susceptibility",
        "--backend",
        "master",
        "--g-range",
        "0.5:2.5:0.25",
        "--delta-range",
        "0:2:0.25",
        "--workers",
        "1",
        "--out",
        first.path().to_str().unwrap(),
    ]);
    ok(&[
        "replay",
        first.path().join("susceptibility.json").to_str().unwrap(),
        "--out",
        second.path().to_str().unwrap(),
    ]);
    for name in ["sweep.csv", "susceptibility.csv", "ridge.csv"] {
        assert_eq!(
            fs::read(first.path().join(name)).unwrap(),
            fs::read(second.path().join(name)).unwrap(),
            "{name}"
        );
    }
    let a = manifest(first.path(), "susceptibility.json");
    let b = manifest(second.path(), "susceptibility.json");
    assert_eq!(a["config"], b["config"]);
}

#[test]
fn replay_of_evolve_matches() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    ok(&[
        "evolve",
        "--g",
        "3",
        "--delta",
        "1",
        "--t-max",
        "2",
        "--out",
        first.path().to_str().unwrap(),
    ]);
    ok(&[
        "replay",
        first.path().join("evolve.json").to_str().unwrap(),
        "--workers",
        "1",
        "--out",
        second.path().to_str().unwrap(),
    ]);
    for name in ["evolve_master.csv", "evolve_meanfield.csv"] {
        assert_eq!(
            fs::read(first.path().join(name)).unwrap(),
            fs::read(second.path().join(name)).unwrap()
        );
    }
}

#[test]
fn broken_manifest_is_invalid_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    fs::write(&path, "{\"schema_version\": \"1.0.0\"}").unwrap();
    let o = twophoton(&[
        "replay",
        path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn manifest_records_effective_defaults() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "curvature",
        "--g-range",
        "0.5:2:0.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let m = manifest(dir.path(), "curvature.json");
    let task = &m["config"]["task"];
    assert_eq!(task["command"], "curvature");
    assert_eq!(task["step"], 1e-4);
    assert_eq!(task["solver"]["master"]["max_retries"], 2);
    assert_eq!(task["solver"]["master"]["evolve"]["residual_tol"], 1e-9);
    assert_eq!(task["solver"]["meanfield_t_cap"], 1e4);
    assert!(m["config"]["output"]["workers"].as_u64().unwrap() >= 1);
    assert_eq!(m["config"]["output"]["gamma"], 1.0);
}

#[test]
fn workers_from_environment_and_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = |extra: &[&str]| {
        let mut args = vec![
            "sweep",
            "--g-range",
            "1:2:0.5",
            "--delta",
            "0",
            "--out",
            out,
        ];
        args.extend(extra);
        let o = Command::new(env!("CARGO_BIN_EXE_twophoton"))
            .args(&args)
            .env("TWOPHOTON_WORKERS", "3")
            .output()
            .unwrap();
        assert!(o.status.success());
        manifest(dir.path(), "sweep.json")["config"]["output"]["workers"]
            .as_u64()
            .unwrap()
    };
    assert_eq!(run(&[]), 3);
    assert_eq!(run(&["--workers", "2"]), 2);
}

#[test]
fn gamma_rescales_rates_only() {
    let one = tempfile::tempdir().unwrap();
    let two = tempfile::tempdir().unwrap();
    for (dir, gamma) in [(&one, "1"), (&two, "2")] {
        ok(&[
            "sweep",
            "--g-range",
            "0.5:1.5:0.5",
            "--delta-range",
            "0:1:0.5",
            "--gamma",
            gamma,
            "--out",
            dir.path().to_str().unwrap(),
        ]);
    }
    let a = rows(&one.path().join("sweep.csv"));
    let b = rows(&two.path().join("sweep.csv"));
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(y[0], 2.0 * x[0]);
        assert_eq!(y[1], 2.0 * x[1]);
        assert_eq!(y[2], x[2]);
    }
}

#[test]
fn steady_meanfield_matches_closed_form_value() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok(&[
        "steady",
        "--g",
        "2",
        "--delta",
        "0",
        "--backend",
        "meanfield",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!((v["summary"]["abs_psi"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}
