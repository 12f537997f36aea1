use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn wqisa(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wqisa"))
        .args(args)
        .current_dir(dir)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_fit_eval_stays_within_global_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&wqisa(
        &[
            "gen",
            "--kind",
            "sine",
            "--count",
            "200",
            "--seed",
            "3",
            "--out",
            "cloud.xyz",
        ],
        d,
    ));
    ok(&wqisa(
        &[
            "fit",
            "--input",
            "cloud.xyz",
            "--n",
            "12",
            "--weight",
            "knn:k=8",
            "--out",
            "model.json",
        ],
        d,
    ));
    ok(&wqisa(
        &[
            "eval",
            "--model",
            "model.json",
            "--input",
            "cloud.xyz",
            "--grid",
            "101",
            "--out",
            "grid.csv",
        ],
        d,
    ));

    let cloud = std::fs::read_to_string(d.join("cloud.xyz")).unwrap();
    let ys: Vec<f64> = cloud
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split_whitespace().last().unwrap().parse().unwrap())
        .collect();
    assert_eq!(ys.len(), 200);
    let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let grid = std::fs::read_to_string(d.join("grid.csv")).unwrap();
    let mut lines = grid.lines();
    assert_eq!(lines.next().unwrap(), "u_1,f,var,lo,hi");
    let mut rows = 0;
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(
            cols[1] >= lo && cols[1] <= hi,
            "f = {} outside [{lo}, {hi}]",
            cols[1]
        );
        assert!(cols[2] >= 0.0 && cols[3] <= cols[1] && cols[1] <= cols[4]);
        rows += 1;
    }
    assert_eq!(rows, 101);

    let report = read_json(&d.join("model.report.json"));
    for key in [
        "config",
        "error_report",
        "bounds",
        "shape_flags",
        "timings",
        "effective_count",
    ] {
        assert!(report.get(key).is_some(), "report lacks {key}");
    }
    assert_eq!(report["bounds"]["coefficients_within"], Value::Bool(true));
}

#[test]
fn cv_on_noisy_sine() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&wqisa(
        &[
            "gen",
            "--kind",
            "sine",
            "--count",
            "300",
            "--seed",
            "1",
            "--sigma",
            "1.0",
            "--out",
            "cloud.xyz",
        ],
        d,
    ));
    let out = wqisa(
        &[
            "cv",
            "--input",
            "cloud.xyz",
            "--candidates",
            "5..50",
            "--weight",
            "knn:k=10",
            "--degree",
            "2",
            "--domain=-2:2",
            "--seed",
            "1",
            "--out",
            "cv.csv",
        ],
        d,
    );
    ok(&out);
    let best: Value = serde_json::from_slice(&out.stdout).unwrap();
    let n = best["best"].as_u64().unwrap();
    assert!((10..=20).contains(&n), "best n = {n}");
    let csv = std::fs::read_to_string(d.join("cv.csv")).unwrap();
    assert_eq!(csv.lines().count(), 47);
}

#[test]
fn oversized_k_warns_and_fits() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("tiny.xyz"), "0 0\n0.25 1\n0.5 0\n0.75 1\n1 0\n").unwrap();
    let out = wqisa(
        &[
            "fit", "--input", "tiny.xyz", "--n", "3", "--weight", "knn:k=50", "--out", "m.json",
        ],
        d,
    );
    ok(&out);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("exceeds"), "stderr: {stderr}");
    let model = read_json(&d.join("m.json"));
    assert_eq!(model["stats"]["k_clamped"], serde_json::json!([50, 5]));
}

#[test]
fn failures_print_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.xyz"), "0 1\n1 x\n").unwrap();
    let out = wqisa(&["fit", "--input", "bad.xyz"], d);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "parse-error");
    assert!(err["error"]["message"].as_str().unwrap().contains("line 2"));

    let out = wqisa(&["fit", "--input", "missing.xyz"], d);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"]["kind"].is_string());
}
