use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nlde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlde")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_scenario(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

const FULL: &str = r#"{
  "schema_version": 1,
  "id": "exp_all",
  "equation": {"catalog": "exp_nonlinear"},
  "solver": {"rays": 4, "report_points": 11, "r_max": 0.9},
  "experiments": [
    {"type": "solve"},
    {"type": "norms", "targets": [{"function": {"inline": {"kind": "series", "series": {"coefficients": [[0.0, 0.0], [1.0, 0.0]]}}}, "space": "bers_s", "s": 1.0}]},
    {"type": "bounds", "epsilon": [0.1]},
    {"type": "conditions", "mode": "thm_beta", "thresholds": [1.0], "radial_n": 8, "angular_n": 8},
    {"type": "scan", "r_max_seq": [0.5, 0.7], "radial_n": 8, "angular_n": 16, "a_grid": [[0.0, 0.0]]}
  ]
}"#;

#[test]
fn catalog_list_names_every_entry() {
    let o = nlde(&["catalog", "list"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["cos_linear", "exp_nonlinear", "herold_pair", "small_norm_qk"] {
        assert!(text.contains(name), "{name} missing");
    }
}

#[test]
fn validate_fills_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(dir.path(), "s.json", r#"{"schema_version": 1, "id": "x", "equation": {"catalog": "cos_linear"}}"#);
    let o = nlde(&["validate", &p]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["solver"]["rays"], 8);
}

#[test]
fn invalid_scenarios_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_scenario(dir.path(), "a.json", r#"{"schema_version": 1, "id": "x", "equation": {"catalog": "nope"}}"#);
    let bad_c = write_scenario(
        dir.path(),
        "b.json",
        r#"{"schema_version": 1, "id": "x", "equation": {"catalog": "exp_nonlinear"},
            "experiments": [{"type": "conditions", "mode": "thm_alpha", "c": 2.0, "thresholds": [1.0]}]}"#,
    );
    let typo = write_scenario(dir.path(), "c.json", r#"{"schema_version": 1, "id": "x", "equation": {"catalog": "cos_linear"}, "solverr": {}}"#);
    for p in [&unknown, &bad_c, &typo] {
        let o = nlde(&["validate", p]);
        assert_eq!(code(&o), 2, "{p}");
        let o = nlde(&["run", p]);
        assert_eq!(code(&o), 2, "{p}");
    }
    let msg = String::from_utf8(nlde(&["validate", &bad_c]).stderr).unwrap();
    assert!(msg.contains("experiments[0]"), "{msg}");
    assert_eq!(code(&nlde(&["run", "/nonexistent/s.json"])), 2);
    assert_eq!(code(&nlde(&["solve", "nope"])), 2);
}

#[test]
fn failing_experiment_exits_1_and_still_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = nlde(&["scan", "bloch_coeff", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let exp = fs::read_to_string(out.join("experiments.csv")).unwrap();
    assert!(exp.contains(",scan,error,"), "{exp}");
}

#[test]
fn run_writes_csv_tables_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(dir.path(), "s.json", FULL);
    let csv_dir = dir.path().join("csv");
    let o = nlde(&["run", &p, "--out", csv_dir.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for t in ["experiments", "solve", "norms", "bounds", "conditions", "volterra", "scan"] {
        let text = fs::read_to_string(csv_dir.join(format!("{t}.csv"))).unwrap();
        assert!(text.starts_with("scenario_id,"), "{t}");
    }
    let bounds = fs::read_to_string(csv_dir.join("bounds.csv")).unwrap();
    assert!(bounds.lines().count() > 1);
    assert!(bounds.lines().skip(1).all(|l| l.ends_with(",true")));

    let json_dir = dir.path().join("json");
    let o = nlde(&["run", &p, "--format", "json", "--out", json_dir.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(json_dir.join("bundle.json")).unwrap()).unwrap();
    assert_eq!(v["scenario_id"], "exp_all");
    assert_eq!(v["records"].as_array().unwrap().len(), 5);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(dir.path(), "s.json", FULL);
    let mut outputs = Vec::new();
    for t in ["1", "4"] {
        let o = nlde(&["run", &p, "--format", "json", "--threads", t]);
        assert_eq!(code(&o), 0);
        outputs.push(o.stdout);
    }
    assert!(!outputs[0].is_empty());
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn tol_flag_reaches_the_solver() {
    let o = nlde(&["solve", "exp_nonlinear", "--tol", "-1"]);
    assert_eq!(code(&o), 2);
    let o = nlde(&["solve", "cos_linear", "--rays", "2", "--report-points", "3", "--tol", "1e-6", "--format", "json"]);
    assert_eq!(code(&o), 0);
}
