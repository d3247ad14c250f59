use std::process::Command;

use serde_json::Value;

fn concentra(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_concentra")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn validate_builtin() {
    let (code, out, _) = concentra(&["validate", "volcano"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["passed"], Value::Bool(true));
}

#[test]
fn unknown_problem_is_a_validation_failure() {
    let (code, _, err) = concentra(&["limit", "no_such_problem"]);
    assert_eq!(code, 2);
    assert!(err.contains("no_such_problem"));
}

#[test]
fn limit_with_from_below_report() {
    let (code, out, _) = concentra(&["limit", "double_well_asym", "--from-below", "100"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["from_below"]["holds"], Value::Bool(true));
}

#[test]
fn closed_form_distance() {
    let (code, out, _) = concentra(&["distance", "normal1d", "--n", "100", "--method", "closed_form"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert!((v["value"].as_f64().unwrap() - 0.1).abs() < 1e-12);
}

#[test]
fn semi_discrete_distance_writes_its_plan() {
    let plan = std::env::temp_dir().join(format!("concentra-plan-{}.csv", std::process::id()));
    let (code, _, _) = concentra(&[
        "distance",
        "double_well_sym",
        "--n",
        "100",
        "--method",
        "semi_discrete",
        "--count",
        "64",
        "--plan",
        plan.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&plan).unwrap();
    assert!(text.starts_with("i,j,mass\n"));
    let mass: f64 = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap()).sum();
    assert!((mass - 1.0).abs() < 1e-9);
    std::fs::remove_file(plan).unwrap();
}

#[test]
fn rate_experiment_from_config() {
    let dir = std::env::temp_dir().join(format!("concentra-cli-rate-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"problem": "normal1d", "method": "closed_form", "n_grid": [16, 32, 64, 128, 256], "replicates": 1}"#,
    )
    .unwrap();
    let prefix = dir.join("out");
    let (code, out, err) = concentra(&["rate", cfg.to_str().unwrap(), "--output", prefix.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let slope = json(&out)["fit"]["slope"].as_f64().unwrap();
    assert!((slope + 0.5).abs() < 1e-9);
    assert!(dir.join("out.csv").exists() && dir.join("out.json").exists());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn laplace_scan_prints_csv() {
    let (code, out, _) = concentra(&["laplace-scan", "normal1d", "--points", "5"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "n,value,reference,abs_error,ratio");
    assert_eq!(lines.len(), 6);
}
