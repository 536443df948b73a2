use std::fs;
use std::path::Path;
use std::process::Command;

fn thinobs(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_thinobs")).args(args).output().expect("binary runs");
    let text = String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().expect("exit code"), text)
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("scenario.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const EXACT_PSI: &str = r#"{
  "grid": {"ambient_dim": 2, "half_width": 1.0, "spacing": 0.0078125, "a": 0.0},
  "field": {"kind": "profile", "family": "psi", "degree": 1, "normalized": true},
  "analyses": [
    {"kind": "frequency", "centers": [[0.0, 0.0]], "radii": [0.1, 0.2, 0.4], "expect_lambda": 1.5, "lambda_tol": 0.03}
  ]
}"#;

const SOLVED_PSI: &str = r#"{
  "grid": {"ambient_dim": 2, "half_width": 1.0, "spacing": 0.015625, "a": 0.0},
  "field": {"kind": "profile", "family": "psi", "degree": 1},
  "solve": {"tolerance": 1e-10},
  "analyses": [
    {"kind": "blowup", "radii": [0.4, 0.2], "expect_lambda": 1.5},
    {"kind": "geometry", "beta_radii": [0.25]}
  ]
}"#;

#[test]
fn exact_profile_frequency_scenario_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), EXACT_PSI);
    let out = dir.path().join("out");
    let (code, text) = thinobs(&["frequency", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{text}");
    let csv = fs::read_to_string(out.join("frequency_0.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("cx,cy,r,H,D,E,I"));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["report_version"], 1);
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["config"]["analyses"][0]["lambda_tol"], 0.03);
}

#[test]
fn failing_check_exits_one_and_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &EXACT_PSI.replace("\"expect_lambda\": 1.5", "\"expect_lambda\": 2.5"));
    let out = dir.path().join("out");
    let (code, text) = thinobs(&["frequency", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 1, "{text}");
    assert!(text.contains("failed check: frequency 0: max |I - 2.5|"), "{text}");
}

#[test]
fn invalid_weight_exponent_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &EXACT_PSI.replace("\"a\": 0.0", "\"a\": 1.5"));
    let (code, text) = thinobs(&["frequency", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 2, "{text}");
}

#[test]
fn unknown_level_exits_two() {
    let (code, _) = thinobs(&["verify", "--level", "medium"]);
    assert_eq!(code, 2);
}

#[test]
fn solve_then_blowup_reports_lambda_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SOLVED_PSI);
    let out = dir.path().join("out");
    let (code, text) = thinobs(&["blowup", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{text}");
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let est = summary["analyses"][0]["fit"]["lambda_estimate"].as_f64().unwrap();
    assert!((est - 1.5).abs() < 0.05, "{est}");
    assert!(out.join("field.tfb").exists());
    assert!(out.join("blowup_0.csv").exists());
    assert!(!out.join("sets_1.json").exists() && !out.join("sets_0.json").exists(), "geometry analysis filtered out");
}

#[test]
fn solve_subcommand_writes_field_and_summary_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SOLVED_PSI);
    let out = dir.path().join("out");
    let (code, text) = thinobs(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{text}");
    let mut names: Vec<String> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["field.tfb", "summary.json"]);
}

#[test]
fn identical_configs_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SOLVED_PSI);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let (code, text) = thinobs(&["geometry", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0, "{text}");
    }
    for name in ["field.tfb", "sets_0.json", "beta_0.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    // The summaries differ only in the echoed output directory.
    let sa = fs::read_to_string(a.join("summary.json")).unwrap();
    let sb = fs::read_to_string(b.join("summary.json")).unwrap();
    assert_eq!(sa.replace(a.to_str().unwrap(), "OUT"), sb.replace(b.to_str().unwrap(), "OUT"));
}
