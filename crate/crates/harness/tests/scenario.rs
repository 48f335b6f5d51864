use l1ofc_harness::output::{csv_header, design_report, write_csv};
use l1ofc_harness::scenario::Reference;
use l1ofc_harness::uncertainty::{f1, f2, UncertaintyKind};
use l1ofc_harness::{run_closed_loop, scenario_dir, HarnessError, Mode, RunOptions, Scenario};
use serde_json::Value;

fn raw(name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(scenario_dir().join(name)).unwrap()).unwrap()
}

fn build(v: &Value) -> Result<Scenario, HarnessError> {
    Scenario::from_json(&v.to_string())
}

#[test]
fn bundled_scenarios_load() {
    for name in ["academic_f1.json", "academic_f2.json", "pendulum_s1.json", "pendulum_s2.json"] {
        let sc = Scenario::from_path(scenario_dir().join(name)).unwrap();
        assert_eq!(sc.file.name, name.trim_end_matches(".json"));
        assert!(sc.design.lyapunov_residual < 1e-9);
    }
}

#[test]
fn reference_forms_evaluate() {
    let sin: Reference = serde_json::from_str(r#"{"type":"sin_sum","params":{"offset":2.0,"terms":[{"amp":2.0,"freq":3.0}]}}"#).unwrap();
    assert!((sin.eval(0.5) - (2.0 + 2.0 * 1.5f64.sin())).abs() < 1e-15);
    assert_eq!(sin.bound(), 4.0);
    let steps: Reference = serde_json::from_str(r#"{"type":"steps","params":{"times":[1.0,2.0],"values":[0.5,-1.0]}}"#).unwrap();
    assert_eq!((steps.eval(0.5), steps.eval(1.0), steps.eval(3.0)), (0.0, 0.5, -1.0));
    assert_eq!(steps.bound(), 1.0);
    let c: Reference = serde_json::from_str(r#"{"type":"const","params":{"value":-3.0}}"#).unwrap();
    assert_eq!((c.eval(7.0), c.bound()), (-3.0, 3.0));
}

#[test]
fn invalid_scenarios_are_config_errors() {
    let base = raw("academic_f1.json");
    let mut cases = Vec::new();
    let mut v = base.clone();
    v["x0"] = serde_json::json!([0.1, 0.2]);
    cases.push(v);
    let mut v = base.clone();
    v["x0"] = serde_json::json!([2.0, 0.0, 0.0]);
    cases.push(v);
    let mut v = base.clone();
    v["kg"] = serde_json::json!([[1.0, 2.0]]);
    cases.push(v);
    let mut v = base.clone();
    v["horizon_s"] = serde_json::json!(-1.0);
    cases.push(v);
    let mut v = base.clone();
    v["reference"] = serde_json::json!({"type": "steps", "params": {"times": [2.0, 1.0], "values": [1.0, 2.0]}});
    cases.push(v);
    let mut v = base.clone();
    v["plant"]["omega_bounds"] = serde_json::json!([1.2, 0.7]);
    cases.push(v);
    let mut v = base.clone();
    v.as_object_mut().unwrap().remove("gamma");
    cases.push(v);
    for (i, v) in cases.iter().enumerate() {
        let err = build(v).unwrap_err();
        assert_eq!(err.exit_code(), 3, "case {i}: {err}");
    }
}

#[test]
fn uncertainty_functions_match_definitions() {
    let x = [0.3, -0.2, 0.1];
    let t = 0.7f64;
    let sq = 0.09 + 0.04 + 0.01;
    let want1 = 0.11 * sq + 0.23 * 0.09 * 0.15f64.tanh() + 1.24 * -0.02 + 0.8 * (1.0 - (-0.49f64).exp()) + 2.0;
    let want2 = 0.15 * sq + 0.22 * 0.09 * 0.06f64.tanh() + 1.34 * -0.02 + 0.5 * (1.0 - (-0.77f64).exp()) + 1.8;
    assert!((f1(&x, t) - want1).abs() < 1e-14);
    assert!((f2(&x, t) - want2).abs() < 1e-14);
    // ‖f(0, t)‖ approaches the declared b0 from below
    for kind in [UncertaintyKind::F1, UncertaintyKind::F2] {
        let b0 = kind.builtin_bounds().unwrap().b0;
        let f = kind.function();
        assert!((0..100).all(|k| f(&[0.0; 3], k as f64 * 0.5)[0].abs() <= b0));
    }
    assert_eq!(UncertaintyKind::None.function()(&x, t), vec![0.0]);
}

#[test]
fn infeasible_design_needs_explicit_opt_in() {
    let mut v = raw("academic_f1.json");
    v["horizon_s"] = serde_json::json!(0.05);
    let sc = build(&v).unwrap();
    let err = run_closed_loop(&sc, &RunOptions::default()).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    let opts = RunOptions {
        allow_infeasible: true,
        ..Default::default()
    };
    let tr = run_closed_loop(&sc, &opts).unwrap();
    assert_eq!(tr.samples.len(), 51);
    assert_eq!(tr.samples[0].x, vec![-0.6, 0.6, -0.9]);
    assert_eq!(tr.samples[0].x_ref, vec![0.0; 3]);
}

#[test]
fn csv_trace_has_documented_columns() {
    let header = csv_header(3, 2, 1);
    assert_eq!(
        header.join(","),
        "t,x1,x2,x3,y1,y2,u1,yref1,yref2,xref1,xref2,xref3,ytilde_norm,envelope,omega_hat,theta_hat1,sigma_hat1"
    );
    let mut v = raw("academic_f1.json");
    v["horizon_s"] = serde_json::json!(0.02);
    let sc = build(&v).unwrap();
    let tr = run_closed_loop(
        &sc,
        &RunOptions {
            allow_infeasible: true,
            ..Default::default()
        },
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    write_csv(&tr, &path).unwrap();
    let mut rd = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), header);
    assert_eq!(rd.records().count(), tr.samples.len());
}

#[test]
fn design_report_carries_constants() {
    let sc = Scenario::from_path(scenario_dir().join("academic_f1.json")).unwrap();
    let r = design_report(&sc.design);
    let text = r.to_string();
    for key in ["rho_x", "gamma_min", "theta1", "alpha"] {
        assert!(text.contains(key), "missing {key}");
    }
}

#[test]
fn pendulum_baseline_ignores_adaptive_gains() {
    let mut v = raw("pendulum_s1.json");
    v["horizon_s"] = serde_json::json!(2.0);
    let sc = build(&v).unwrap();
    let run = |g: f64| {
        run_closed_loop(
            &sc,
            &RunOptions {
                mode: Mode::Baseline,
                allow_infeasible: true,
                gains: Some(l1ofc::runtime::AdaptationGains::uniform(g)),
                ..Default::default()
            },
        )
        .unwrap()
    };
    let (a, b) = (run(10.0), run(1e4));
    assert_eq!(a.samples.last().unwrap().x, b.samples.last().unwrap().x);
}

#[test]
fn uncertainty_swap_keeps_design() {
    let sc = Scenario::from_path(scenario_dir().join("academic_f1.json")).unwrap();
    let swapped = sc.with_uncertainty(UncertaintyKind::F2).unwrap();
    assert!(std::sync::Arc::ptr_eq(&sc.design, &swapped.design));
    assert_eq!(swapped.file.uncertainty, UncertaintyKind::F2);
}

#[test]
fn zero_delay_equals_undelayed_run() {
    let mut v = raw("academic_f1.json");
    v["horizon_s"] = serde_json::json!(0.3);
    let sc = build(&v).unwrap();
    let opts = RunOptions {
        allow_infeasible: true,
        ..Default::default()
    };
    let a = run_closed_loop(&sc, &opts).unwrap();
    let b = run_closed_loop(&sc, &RunOptions { delay_s: 0.0, ..opts }).unwrap();
    assert_eq!(a.samples.last().unwrap().x, b.samples.last().unwrap().x);
    let c = run_closed_loop(&sc, &RunOptions { delay_s: 0.05, ..opts }).unwrap();
    assert_ne!(a.samples.last().unwrap().x, c.samples.last().unwrap().x);
}
