use std::path::Path;
use std::process::Command;

use l1ofc_harness::scenario_dir;
use serde_json::Value;

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_l1ofc")).args(args).output().unwrap();
    let text = format!("{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr));
    (out.status.code().unwrap(), text)
}

fn edited(dir: &Path, name: &str, edit: impl FnOnce(&mut Value)) -> String {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(scenario_dir().join(name)).unwrap()).unwrap();
    edit(&mut v);
    let path = dir.join(name);
    std::fs::write(&path, v.to_string()).unwrap();
    path.display().to_string()
}

#[test]
fn verify_reports_infeasible_design() {
    let path = scenario_dir().join("academic_f1.json");
    let (code, text) = cli(&["verify", path.to_str().unwrap()]);
    assert_eq!(code, 1, "{text}");
    assert!(text.contains("INFEASIBLE"));
}

#[test]
fn missing_file_is_config_error() {
    let (code, _) = cli(&["simulate", "/nonexistent/scenario.json"]);
    assert_eq!(code, 3);
}

#[test]
fn simulate_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let sc = edited(dir.path(), "academic_f1.json", |v| v["horizon_s"] = 0.1.into());
    let out = dir.path().join("out");
    let (code, text) = cli(&["simulate", &sc, "--allow-infeasible", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{text}");
    for f in ["academic_f1_adaptive.csv", "academic_f1_design.json", "plot.py"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let (code, _) = cli(&["simulate", &sc]);
    assert_eq!(code, 1);
}

#[test]
fn diverging_run_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let sc = edited(dir.path(), "pendulum_s2.json", |v| {
        v["horizon_s"] = 5.0.into();
        v["pendulum"]["friction_form"] = "literal".into();
    });
    let (code, text) = cli(&["simulate", &sc, "--allow-infeasible", "--baseline"]);
    assert_eq!(code, 2, "{text}");
}

#[test]
fn small_gain_is_flagged_by_bounds() {
    let path = scenario_dir().join("academic_f1.json");
    let (code, text) = cli(&["bounds", path.to_str().unwrap(), "--gamma", "500"]);
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("gamma 500: ") && !text.contains("gamma 500: certified"));
}
