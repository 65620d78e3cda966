use std::fs;
use std::process::{Command, Output};

use exthyp_cli::{run, ExperimentConfig, Report, Status};
use serde_json::Value;

fn exthyp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exthyp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn passing_experiment_exits_zero() {
    let o = exthyp(&["contour-eval"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let j: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(j["experiment"], "contour-eval");
    assert_eq!(j["status"], "pass");
    let rows = j["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert!(r["tolerance"].as_f64().unwrap() > 0.0);
        assert_eq!(r["pass"], true);
        assert!(r["value"]["re"].is_f64() && r["value"]["im"].is_f64());
    }
    assert!((rows[0]["value"]["im"].as_f64().unwrap() + std::f64::consts::PI).abs() < 1e-9);
}

#[test]
fn failed_oracle_exits_one() {
    // a tolerance no fit can meet
    let o = exthyp(&["reg2d", "--param", "exponent_rtol=1e-300"]);
    assert_eq!(o.status.code(), Some(1));
    let j: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(j["status"], "fail");
}

#[test]
fn engine_error_becomes_failure_row() {
    // x_n = 0 is the ideal boundary of the flattened chart
    let o = exthyp(&["density-eval", "--param", "point=[0.1, 0.0]"]);
    assert_eq!(o.status.code(), Some(3));
    let j: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(j["status"], "error");
    assert_eq!(j["rows"][0]["pass"], false);
    assert!(j["rows"][0]["note"].as_str().unwrap().contains("singular"));
}

#[test]
fn usage_errors_exit_two_and_name_the_field() {
    let o = exthyp(&["cone", "--param", "kk=2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("parameters.kk"));
    assert!(o.stdout.is_empty());

    let o = exthyp(&["reg2d", "--param", "exponent_rtol=-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("parameters.exponent_rtol"));

    assert_eq!(exthyp(&["reg2d", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(exthyp(&["no-such-experiment"]).status.code(), Some(2));
    assert_eq!(exthyp(&["run"]).status.code(), Some(2));
}

#[test]
fn reports_are_byte_stable_and_untimed_by_default() {
    let a = exthyp(&["reg2d"]);
    let b = exthyp(&["reg2d"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(!stdout(&a).contains("elapsed_seconds"));
    let t = exthyp(&["reg2d", "--timing"]);
    let j: Value = serde_json::from_str(&stdout(&t)).unwrap();
    assert!(j["elapsed_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn threshold_rows_follow_the_exponent() {
    let j: Value = serde_json::from_str(&stdout(&exthyp(&["reg2d"]))).unwrap();
    let labels: Vec<(&str, &str)> = j["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["name"].as_str().unwrap().starts_with("beta="))
        .map(|r| (r["name"].as_str().unwrap(), r["value"].as_str().unwrap()))
        .collect();
    assert_eq!(
        labels,
        vec![
            ("beta=0.4", "PowerLaw(0.1000)"),
            ("beta=0.5", "Log"),
            ("beta=0.6", "Convergent(0.1000)")
        ]
    );
}

#[test]
fn config_file_flags_and_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("report.csv");
    fs::write(
        &cfg,
        r#"{"experiment": "reg3d", "parameters": {"alpha": [0.3]}, "output": {"format": "csv"}}"#,
    )
    .unwrap();
    let o = exthyp(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--param",
        "alpha=[0.25, -0.25]",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let csv = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("name,value_re,value_im"));
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("alpha=0.25,,,Convergent(0.2500)"));
    assert!(lines[3].starts_with("alpha=-0.25,,,PowerLaw(0.2500)"));

    // the subcommand must agree with the file
    let o = exthyp(&["cone", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(exthyp(&["run", "--config", missing.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn plot_tables() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("half.tsv");
    let arg = format!("beta=0.5={}", path.display());
    let o = exthyp(&["reg2d", "--param", "beta=[0.5]", "--plot", &arg]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("tau\tI"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once('\t').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert!(rows.len() > 20);
    // logarithmic growth: equal increments per halving of tau
    for w in rows.windows(2) {
        assert!(w[1].0 < w[0].0);
        assert!(((w[1].1 - w[0].1) - 2f64.ln()).abs() < 1e-9);
    }

    let bad = format!("nope={}", dir.path().join("x.tsv").display());
    assert_eq!(exthyp(&["reg2d", "--plot", &bad]).status.code(), Some(2));
}

#[test]
fn echoed_inputs_rerun_the_same_experiment() {
    let mut cfg = ExperimentConfig::new(exthyp_cli::Experiment::Invariance);
    cfg.set_param("t=0.3").unwrap();
    let first = run(&cfg).unwrap();
    let text = first.to_json();
    let parsed = Report::from_json(&text).unwrap();
    let again_cfg = ExperimentConfig::from_json(&serde_json::to_string(&parsed.inputs).unwrap()).unwrap();
    assert_eq!(again_cfg, first.inputs);
    let again = run(&again_cfg).unwrap();
    assert_eq!(again.to_json(), text);
    assert_eq!(first.status, Status::Pass);
}
