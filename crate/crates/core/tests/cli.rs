use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sigma-evolve"));
    c.env_remove("SIGMA_EVOLVE_THREADS");
    c
}

fn write_config(dir: &Path, name: &str, v: Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string(&v).unwrap()).unwrap();
    p
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg(cmd)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn small_grid() -> Value {
    json!({ "points": 256, "box": 30.0 })
}

#[test]
fn predict_reports_critical_exponent() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", json!({ "params": { "n": 1, "sigma": 2, "mu": 0.75 } }));
    let out = run("predict", &cfg, tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let doc = read_json(&tmp.path().join("exponents.json"));
    assert_eq!(doc["exponents"]["p_crit"], json!(9.0));
    let stdout: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stdout, doc);
}

#[test]
fn predict_writes_infinite_q0_as_string() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", json!({ "params": { "n": 1, "sigma": 2, "mu": 1.5 } }));
    assert_eq!(run("predict", &cfg, tmp.path(), &[]).status.code(), Some(0));
    let doc = read_json(&tmp.path().join("exponents.json"));
    assert_eq!(doc["exponents"]["q0"], json!("inf"));
}

#[test]
fn predict_attaches_verdicts() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        json!({
            "params": { "n": 1, "sigma": 2, "mu": 0.75 },
            "grid": small_grid(),
            "experiment": { "p_list": [2, 10], "T": 10 }
        }),
    );
    assert_eq!(run("predict", &cfg, tmp.path(), &[]).status.code(), Some(0));
    let doc = read_json(&tmp.path().join("exponents.json"));
    assert_eq!(doc["verdicts"][0]["verdict"]["kind"], json!("blowup_expected"));
    assert_eq!(doc["verdicts"][1]["verdict"]["kind"], json!("global_expected"));
}

#[test]
fn missing_mu_exits_with_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", json!({ "params": { "n": 1, "sigma": 2 } }));
    let out = run("predict", &cfg, tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("params.mu required"));
}

#[test]
fn unknown_field_is_named() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        json!({ "params": { "n": 1, "sigma": 2, "mu": 1 }, "experiment": { "controls": { "fp_toll": 1 } } }),
    );
    let out = run("simulate", &cfg, tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("experiment") && err.contains("fp_toll"), "{err}");
}

fn kernel(args: &[&str]) -> (Option<i32>, Value) {
    let out = bin().arg("kernel").args(args).output().unwrap();
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code(), v)
}

#[test]
fn kernel_vanishes_at_equal_times() {
    let (code, v) = kernel(&["--t", "4", "--s", "4", "--xi", "0.3", "--sigma", "2", "--mu", "0.75"]);
    assert_eq!(code, Some(0));
    assert_eq!(v["psi"], json!(0.0));
}

#[test]
fn kernel_zero_mode_closed_form() {
    let (code, v) = kernel(&["--t", "1", "--s", "0", "--xi", "0", "--sigma", "2", "--mu", "2"]);
    assert_eq!(code, Some(0));
    assert_eq!(v["zone"], json!("ZERO"));
    assert!((v["psi"].as_f64().unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn kernel_check_reports_oracle_delta() {
    for (xi, j, k) in [("0.05", "0", "0"), ("0.8", "1", "0"), ("3", "0", "1")] {
        let (code, v) = kernel(&[
            "--t", "20", "--s", "1", "--xi", xi, "--j", j, "--k", k, "--sigma", "1.5", "--mu", "3", "--check",
        ]);
        assert_eq!(code, Some(0));
        let d = v["oracle_delta"].as_f64().unwrap();
        assert!(d <= 1e-6 * (1.0 + v["psi"].as_f64().unwrap().abs()), "{v}");
    }
}

#[test]
fn kernel_rejects_reversed_times() {
    let (code, _) = kernel(&["--t", "1", "--s", "2", "--xi", "1", "--sigma", "2", "--mu", "1"]);
    assert_eq!(code, Some(2));
}

#[test]
fn simulate_empty_horizon_writes_manifest_only() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        json!({ "params": { "n": 1, "sigma": 2, "mu": 0.75 }, "experiment": { "T": 0, "p": 3 } }),
    );
    let out_dir = tmp.path().join("run");
    assert_eq!(run("simulate", &cfg, &out_dir, &[]).status.code(), Some(0));
    let names: Vec<String> = fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(names, ["manifest.json"]);
    let m = read_json(&out_dir.join("manifest.json"));
    assert_eq!(m["times"], json!([0.0]));
    assert_eq!(m["trajectory"]["records"], json!(1));
    assert_eq!(m["config"]["experiment"]["p"], json!(3));
}

#[test]
fn simulate_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        json!({
            "params": { "n": 1, "sigma": 2, "mu": 0.75 },
            "grid": small_grid(),
            "experiment": {
                "p": 10, "T": 20,
                "data": { "kind": "random", "amplitude": 0.1, "width": 2 },
                "controls": { "m_steps": 30, "snapshot_every": 10 }
            }
        }),
    );
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    assert_eq!(run("simulate", &cfg, &a, &["--seed", "7", "--q", "4,inf"]).status.code(), Some(0));
    assert_eq!(run("simulate", &cfg, &b, &["--seed", "7", "--q", "4,inf"]).status.code(), Some(0));
    assert_eq!(run("simulate", &cfg, &c, &["--seed", "8", "--q", "4,inf"]).status.code(), Some(0));
    let csv = |d: &Path| fs::read(d.join("trajectory.csv")).unwrap();
    assert_eq!(csv(&a), csv(&b));
    assert_ne!(csv(&a), csv(&c));
    let manifest = |d: &Path| {
        let mut m = read_json(&d.join("manifest.json"));
        m["resolved"]["output"]["directory"] = Value::Null;
        m
    };
    assert_eq!(manifest(&a), manifest(&b));
    let text = String::from_utf8(csv(&a)).unwrap();
    assert!(text.starts_with("t,L1,L2,L4,Linf,Hdot_sigma,ut_L2\n"));
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 32);
    assert!(a.join("snapshot_00030.csv").exists());
    let m = read_json(&a.join("manifest.json"));
    assert_eq!(m["resolved"]["experiment"]["data"]["seed"], json!(7));
    assert_eq!(m["resolved"]["experiment"]["q_list"], json!([4.0, "inf"]));
}

#[test]
fn simulate_blowup_exits_4() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        json!({
            "params": { "n": 1, "sigma": 2, "mu": 0.75 },
            "grid": { "points": 128, "box": 12 },
            "experiment": { "p": 2, "T": 50, "data": { "kind": "gaussian", "amplitude": 20, "width": 1 } }
        }),
    );
    let out = run("simulate", &cfg, tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(4));
    let m = read_json(&tmp.path().join("manifest.json"));
    assert_eq!(m["trajectory"]["status"], json!("blowup_abort"));
}

#[test]
fn simulate_tolerance_abort_exits_5_with_residuals() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        json!({
            "params": { "n": 1, "sigma": 2, "mu": 0.75 },
            "grid": small_grid(),
            "experiment": { "p": 2, "T": 10, "controls": { "max_iters": 2 } }
        }),
    );
    let out = run("simulate", &cfg, tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(5));
    let m = read_json(&tmp.path().join("manifest.json"));
    assert_eq!(m["residual_history"].as_array().unwrap().len(), 2);
}

#[test]
fn unwritable_output_exits_2() {
    let tmp = TempDir::new().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        json!({ "params": { "n": 1, "sigma": 2, "mu": 1 }, "grid": small_grid(), "experiment": { "T": 1 } }),
    );
    let out = run("simulate", &cfg, &blocker.join("sub"), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_passes_for_strong_damping() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        json!({
            "params": { "n": 1, "sigma": 2, "mu": 3 },
            "experiment": { "T": 1000, "q_list": [2], "max_box_doublings": 0 }
        }),
    );
    let out = run("verify", &cfg, tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("verify.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    assert!(row.starts_with("L^2,") && row.ends_with(",true"), "{row}");
    let r = read_json(&tmp.path().join("verify.json"));
    assert_eq!(r["report"]["rows"][0]["pass"], json!(true));
}

#[test]
fn verify_failure_exits_3() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        json!({
            "params": { "n": 1, "sigma": 2, "mu": 3 },
            "grid": { "points": 1024, "box": 120 },
            "experiment": { "T": 100, "window": [50, 100], "max_box_doublings": 0 }
        }),
    );
    assert_eq!(run("verify", &cfg, tmp.path(), &[]).status.code(), Some(3));
}

#[test]
fn sweep_reports_both_verdicts() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        json!({
            "params": { "n": 1, "sigma": 2, "mu": 0.75 },
            "grid": small_grid(),
            "experiment": { "p_list": [2, 10], "T": 10, "controls": { "m_steps": 20 } }
        }),
    );
    let out = bin()
        .env("SIGMA_EVOLVE_THREADS", "1")
        .args(["sweep", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].contains(",blowup_expected,"));
    assert!(rows[1].contains(",global_expected,"));
}

#[test]
fn bad_thread_cap_exits_2() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", json!({ "params": { "n": 1, "sigma": 2, "mu": 1 } }));
    let out = bin()
        .env("SIGMA_EVOLVE_THREADS", "0")
        .args(["predict", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
