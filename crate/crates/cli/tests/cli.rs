use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const CONFIG: &str = r#"{"dim": 1, "n": 64, "p": 2.0, "q": 1.5, "s": 4.0}"#;
const CONSTANTS: &str = r#"{"alpha1": 0.5, "c_q": 0.3, "c_s": 0.35, "p": 2.0, "q": 1.5, "s": 4.0, "lambda": 2.0}"#;

fn mpsolve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpsolve"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn full_run_writes_report_and_profiles() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.json", CONFIG);
    let report = dir.path().join("report.json");
    let profiles = dir.path().join("profiles");
    let out = mpsolve(&[
        "full",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
        "--profiles",
        profiles.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(report["status"], "complete");
    let solutions = report["solutions"].as_array().unwrap();
    assert_eq!(solutions.len(), 4);
    for s in solutions {
        let path = s["profile"].as_str().unwrap();
        let text = fs::read_to_string(path).unwrap();
        assert!(text.starts_with("x,u\n"));
        assert_eq!(text.lines().count(), 1 + 65);
    }
    for name in ["minimum_positive", "minimum_negative", "mountain_pass_positive", "mountain_pass_negative"] {
        assert!(profiles.join(format!("{name}.csv")).exists(), "{name} missing");
    }
}

#[test]
fn minimize_prints_report_to_stdout() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.json", CONFIG);
    let profiles = dir.path().join("p");
    let out = mpsolve(&["minimize", "--config", cfg.to_str().unwrap(), "--profiles", profiles.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["expected_solutions"], 2);
    assert_eq!(report["solutions"].as_array().unwrap().len(), 2);
}

#[test]
fn lambda1_from_constants() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "k.json", CONSTANTS);
    let out = mpsolve(&["lambda1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let lambda1 = json(&out)["lambda1"].as_f64().unwrap();
    // closed form: lambda1 = q k(x*) / c_q^q at the maximizer x* of k
    let (a, cq, cs, p, q, s) = (0.5f64, 0.3f64, 0.35f64, 2.0f64, 1.5f64, 4.0f64);
    let x = (a * (p - q) * s / (cs.powf(s) * (s - q))).powf(1.0 / (s - p));
    let k = a * x.powf(p - q) - cs.powf(s) * x.powf(s - q) / s;
    let expected = q * k / cq.powf(q);
    assert!((lambda1 - expected).abs() <= 1e-9 * expected, "{lambda1} vs {expected}");
}

#[test]
fn lambda1_from_run_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.json", CONFIG);
    let out = mpsolve(&["lambda1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["lambda1"].as_f64().unwrap() > 0.0);
}

#[test]
fn analyze_h_reports_the_window() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "k.json", CONSTANTS);
    let out = mpsolve(&["analyze-h", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let a = json(&out);
    let (r0, x, r1) = (a["r0"].as_f64().unwrap(), a["x_max"].as_f64().unwrap(), a["r1"].as_f64().unwrap());
    assert!(0.0 < r0 && r0 < x && x < r1);
    assert!(a["h_max"].as_f64().unwrap() > 0.0);
}

#[test]
fn analyze_h_needs_lambda_for_constants() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "k.json", r#"{"alpha1": 0.5, "c_q": 0.3, "c_s": 0.35, "p": 2, "q": 1.5, "s": 4}"#);
    let out = mpsolve(&["analyze-h", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_hypotheses_prints_certificate() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.json", CONFIG);
    let out = mpsolve(&["check-hypotheses", "--config", cfg.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert!(report["violations"].as_array().unwrap().is_empty());
    assert!(report["samples"].as_u64().unwrap() > 0);
}

#[test]
fn invalid_config_exits_with_code_2() {
    let dir = TempDir::new().unwrap();
    for (name, text) in [
        ("order.json", r#"{"dim": 1, "n": 64, "p": 2.0, "q": 2.5, "s": 4.0}"#),
        ("family.json", r#"{"dim": 1, "n": 64, "p": 2.0, "q": 1.5, "s": 4.0, "family": {"id": "nope"}}"#),
        ("syntax.json", "{"),
    ] {
        let cfg = write(dir.path(), name, text);
        let out = mpsolve(&["full", "--config", cfg.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("invalid configuration"));
    }
    let out = mpsolve(&["full", "--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn trace_goes_to_stderr() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.json", CONFIG);
    let profiles = dir.path().join("p");
    let out = mpsolve(&[
        "minimize",
        "--config",
        cfg.to_str().unwrap(),
        "--profiles",
        profiles.to_str().unwrap(),
        "--trace",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let err = String::from_utf8_lossy(&out.stderr);
    let mut lines = err.lines();
    assert_eq!(lines.next(), Some("stage,sign,iteration,energy,residual,seminorm"));
    let row = lines.next().expect("at least one trace row");
    assert!(row.starts_with("minimize,positive,0,"));
    json(&out);
}

#[test]
fn seed_makes_reports_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.json", CONFIG);
    let run = || {
        let out = mpsolve(&["check-hypotheses", "--config", cfg.to_str().unwrap(), "--seed", "42"]);
        assert_eq!(out.status.code(), Some(0));
        out.stdout
    };
    assert_eq!(run(), run());
}
