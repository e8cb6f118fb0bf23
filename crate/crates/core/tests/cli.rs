use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const REFERENCE_MODEL: &str =
    r#"{"a": -6.0, "b": 3.0, "c": 3.0, "d": -6.0, "theta_u": 0.1, "theta_v": 0.2, "delta": 40.0}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_delayed-wc"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn reference_config(dir: &Path) -> String {
    write_config(dir, "model.json", &format!(r#"{{"model": {REFERENCE_MODEL}, "kernel": "dirac", "tau": 1.0}}"#))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn equilibria_reports_reference_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = reference_config(dir.path());
    let o = run(&["--config", &cfg, "equilibria"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "index,u_star,v_star,phi1,phi2,alpha,beta");
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!((row[1] - 0.0660694).abs() < 1e-5 && (row[2] - 0.076733).abs() < 1e-5);
    assert!((row[5] / -31.8118 - 1.0).abs() < 1e-3 && (row[6] / 188.846 - 1.0).abs() < 1e-3);
    assert!(lines.next().is_none());
}

#[test]
fn equilibria_from_flags_and_json_format() {
    let o = run(&[
        "equilibria", "--a", "0", "--b", "0", "--c", "0", "--d", "0", "--theta-u", "0", "--theta-v", "0", "--delta", "4",
        "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let eqs = v.as_array().unwrap();
    assert_eq!(eqs.len(), 1);
    assert!((eqs[0]["u_star"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((eqs[0]["phi1"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = reference_config(dir.path());
    let o = run(&["--config", &cfg, "equilibria", "--a", "0", "--b", "0", "--c", "0", "--d", "0", "--theta-u", "0", "--theta-v", "0"]);
    let text = stdout(&o);
    assert!(text.lines().nth(1).unwrap().starts_with("0,0.5,0.5,"), "{text}");
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.json", "{\n  \"tau\": 1.0,\n  \"kernel\": \"dirac\",\n  oops\n}\n");
    let o = run(&["--config", &bad, "equilibria"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));

    let unknown = write_config(dir.path(), "unknown.json", r#"{"kernal": "dirac"}"#);
    let o = run(&["--config", &unknown, "equilibria"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("kernal"));

    let o = run(&["equilibria", "--a", "1"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["boundary", "--kernel", "gamma:q=2", "--tau", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("q"));

    let o = run(&["boundary", "--kernel", "dirac", "--tau", "1", "--tol-override", "bogus=1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn domain_errors_exit_four() {
    let o = run(&["boundary", "--kernel", "uniform:eps=1.5", "--tau", "1"]);
    assert_eq!(o.status.code(), Some(4));
    // unstable before any delay
    let o = run(&[
        "critical-tau", "--kernel", "dirac", "--a", "10", "--b", "0", "--c", "0", "--d", "10", "--theta-u", "-5",
        "--theta-v", "-5", "--delta", "1", "--equilibrium-index", "4",
    ]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn boundary_writes_csv_and_codim2_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("strong.csv");
    let o = run(&["boundary", "--kernel", "gamma:p=2", "--tau", "1", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("segment,omega,alpha,beta\n"));
    for seg in ["l0,", "ltau,", "gamma,"] {
        assert!(csv.lines().any(|l| l.starts_with(seg)), "{seg}");
    }
    let codim: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("strong_codim2.json")).unwrap()).unwrap();
    assert_eq!(codim["bounded"], Value::Bool(true));
    let dh = codim["double_hopf"].as_array().unwrap();
    assert!((dh[0].as_f64().unwrap() + 18.0).abs() < 1e-8 && (dh[1].as_f64().unwrap() - 81.0).abs() < 1e-8);

    let o = run(&["boundary", "--kernel", "gamma:p=1", "--tau", "1", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["bounded"], Value::Bool(false));
    assert!(v["samples"].as_array().unwrap().len() > 10);

    let o = run(&["boundary", "--kernel", "dirac", "--tau", "1", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["bt"], serde_json::json!([2.0, 1.0]));
}

#[test]
fn critical_tau_reports_each_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = reference_config(dir.path());
    let tau_star = |kernel: &str| -> Value {
        let o = run(&["--config", &cfg, "critical-tau", "--kernel", kernel]);
        assert_eq!(o.status.code(), Some(0));
        serde_json::from_str::<Value>(&stdout(&o)).unwrap()["tau_star"].clone()
    };
    assert!((tau_star("dirac").as_f64().unwrap() - 0.0674893).abs() < 1e-5);
    assert!((tau_star("gamma:p=2").as_f64().unwrap() - 0.202917).abs() < 1e-5);
    assert_eq!(tau_star("gamma:p=1"), Value::Null);
}

#[test]
fn simulate_writes_trajectory_and_behavior() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = reference_config(dir.path());
    let out = dir.path().join("run.csv");
    let o = run(&[
        "--config", &cfg, "simulate", "--kernel", "gamma:p=2", "--tau", "0.1", "--t-end", "60", "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("t,u,v,x1,x2,y1,y2\n"));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("run_behavior.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "Decay");

    // zero delay falls back to the ordinary system
    let o = run(&["--config", &cfg, "simulate", "--kernel", "dirac", "--tau", "0", "--t-end", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("t,u,v\n"));

    let o = run(&["--config", &cfg, "simulate", "--tau", "0.01", "--dt", "0.05"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_dirac_oscillates_past_critical_delay() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = reference_config(dir.path());
    let o = run(&["--config", &cfg, "simulate", "--tau", "0.1", "--t-end", "100", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_ne!(v["behavior"]["verdict"], "Decay");
    assert!(v["trajectory"]["u"].as_array().unwrap().len() > 1000);
}

#[test]
fn scan_is_deterministic_and_respects_delay_independent_regions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = reference_config(dir.path());
    let first = run(&["--config", &cfg, "scan", "--kernel", "dirac", "--tau", "1"]);
    let second = run(&["--config", &cfg, "scan", "--kernel", "dirac", "--tau", "1"]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let text = stdout(&first);
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let (a, b): (f64, f64) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        if a.abs() + b.abs() < 1.0 {
            assert_eq!(f[2], "Stable", "{line}");
        }
        if b < a - 1.0 {
            assert_eq!(f[2], "Unstable", "{line}");
        }
        rows += 1;
    }
    assert_eq!(rows, 2500);
}

#[test]
fn every_subcommand_has_help() {
    for cmd in ["equilibria", "boundary", "critical-tau", "simulate", "scan"] {
        let o = run(&[cmd, "--help"]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        for flag in ["--config", "--output", "--format", "--seed", "--tol-override"] {
            assert!(text.contains(flag), "{cmd} help lacks {flag}");
        }
    }
}
