use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn maneuver(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maneuver"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn write_config(dir: &Path, json: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, json).unwrap();
    p.to_string_lossy().into_owned()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn metrics(dir: &Path, direction: &str) -> Value {
    let text = fs::read_to_string(dir.join(format!("metrics_{direction}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn full_pipeline_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        let o = maneuver(&["simulate"], d);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let fa = read_dir_sorted(&a);
    let fb = read_dir_sorted(&b);
    assert_eq!(fa.len(), fb.len());
    for ((na, ba), (nb, bb)) in fa.iter().zip(&fb) {
        assert_eq!(na, nb);
        assert!(ba == bb, "{na} differs between runs");
    }
    for name in ["trajectory_forward_PID_DOB.csv", "trajectory_backward_DOB.csv", "gain_schedule_forward.json"] {
        assert!(fa.iter().any(|(n, _)| n == name), "missing {name}");
    }

    let fw = fa.iter().find(|(n, _)| n == "gain_schedule_forward.json").unwrap();
    let bw = fa.iter().find(|(n, _)| n == "gain_schedule_backward.json").unwrap();
    assert_eq!(fw.1, bw.1, "symmetric vehicle should give identical schedules");

    let m = metrics(&a, "forward");
    assert_eq!(m["pid_dob_dominates"], Value::Bool(true));
    assert_eq!(m["controllers"].as_array().unwrap().len(), 3);
}

#[test]
fn staged_run_matches_regenerated_run() {
    let tmp = TempDir::new().unwrap();
    let (staged, fresh) = (tmp.path().join("staged"), tmp.path().join("fresh"));
    let args = ["--direction", "backward", "--controllers", "PID,PID_DOB"];
    for cmd in ["plan", "design"] {
        let mut a = vec![cmd];
        a.extend_from_slice(&args);
        assert_eq!(code(&maneuver(&a, &staged)), 0);
    }
    let mut a = vec!["simulate", "--no-regenerate"];
    a.extend_from_slice(&args);
    let o = maneuver(&a, &staged);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut a = vec!["simulate"];
    a.extend_from_slice(&args);
    assert_eq!(code(&maneuver(&a, &fresh)), 0);
    assert_eq!(metrics(&staged, "backward"), metrics(&fresh, "backward"));

    let o = maneuver(&["report", "--direction", "backward"], &staged);
    assert_eq!(code(&o), 0);
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("| Metric | PID | PID_DOB |"), "{table}");
    assert!(staged.join("comparison.md").exists());
}

#[test]
fn missing_artifacts_fail_without_writing() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("nothing");
    let o = maneuver(&["simulate", "--no-regenerate"], &out);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists(), "partial outputs written");

    let o = maneuver(&["report"], &out);
    assert_eq!(code(&o), 1);
    assert!(!out.exists());
}

#[test]
fn invalid_configuration_exits_with_code_two() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let cases = [
        r#"{"fit": {"q": 7}}"#,
        r#"{"fit": {"m": 4, "unknown": 1}}"#,
        r#"{"design": {"region": {"omega_max": 0.1}}}"#,
        r#"{"limits": {"v_min": 2.0}}"#,
        r#"{"controllers": []}"#,
        r#"not json"#,
    ];
    for json in cases {
        let cfg = write_config(tmp.path(), json);
        let o = maneuver(&["plan", "--config", &cfg], &out);
        assert_eq!(code(&o), 2, "{json}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let cfg = write_config(tmp.path(), r#"{"design": {"region": {"omega_max": 0.1}}}"#);
    let o = maneuver(&["design", "--config", &cfg], &out);
    assert!(String::from_utf8_lossy(&o.stderr).contains("must exceed"));
    assert_eq!(code(&maneuver(&["plan", "--preset", "nope"], &out)), 2);
    assert_eq!(code(&maneuver(&["simulate", "--controllers", "LQR"], &out)), 2);
    assert!(!out.exists());
}

#[test]
fn straight_preset_has_zero_curvature() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    assert_eq!(code(&maneuver(&["plan", "--preset", "straight"], &out)), 0);
    let mut rdr = csv::Reader::from_path(out.join("curvature_forward.csv")).unwrap();
    let mut rows = 0;
    for rec in rdr.records() {
        let k: f64 = rec.unwrap()[1].parse().unwrap();
        assert!(k.abs() < 1e-9, "κ = {k}");
        rows += 1;
    }
    assert!(rows > 100);
}

#[test]
fn single_controller_report_has_one_column() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let o = maneuver(&["simulate", "--controllers", "DOB", "--direction", "forward"], &out);
    assert_eq!(code(&o), 0);
    let md = fs::read_to_string(out.join("comparison_forward.md")).unwrap();
    assert!(md.contains("| Metric | DOB |"));
    assert!(!md.contains("PID"));
    assert_eq!(metrics(&out, "forward")["pid_dob_dominates"], Value::Null);
    assert!(!out.join("trajectory_backward_DOB.csv").exists());
}
