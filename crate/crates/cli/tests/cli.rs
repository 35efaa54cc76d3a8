use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracsteady"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    fs::write(dir.join(name), body).unwrap();
    name.to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SWEEP: &str = r#"{
  "domain": {"n": 96},
  "model": {"lambda_over_lambda1": 2.0, "c": 1.0},
  "sweep": {
    "x": {"param": "K", "linspace": [0.2, 1.2, 6]},
    "y": {"param": "eps_over_eps_star", "values": [0.1, 0.5, 0.9, 1.2]}
  }
}"#;

fn map_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn verify_on_defaults_passes() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &["verify", "--out", "v"]);
    assert_eq!(o.status.code(), Some(0), "{}\n{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("PASS"));
    assert!(!stdout(&o).contains("FAIL"));
    assert!(tmp.path().join("v/verify.json").exists());
}

#[test]
fn sweep_solves_every_predicted_cell() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "sweep.json", SWEEP);
    let o = run(tmp.path(), &["sweep", "--config", &cfg, "--out", "m"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = map_rows(&tmp.path().join("m/map.csv"));
    assert_eq!(rows.len(), 24);
    let predicted: Vec<_> = rows.iter().filter(|r| r[2] == "true").collect();
    assert!(!predicted.is_empty());
    for r in &predicted {
        assert_eq!(r[3], "true", "predicted cell not solved: {r:?}");
    }
    let svg = fs::read_to_string(tmp.path().join("m/map.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="cell""#).count(), 6 * 4);
}

#[test]
fn sweep_output_does_not_depend_on_worker_count() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "sweep.json", SWEEP);
    for (out, workers) in [("w1", "1"), ("w4", "4"), ("w4b", "4")] {
        let o = run(tmp.path(), &["sweep", "--config", &cfg, "--out", out, "--workers", workers]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for file in ["map.csv", "map.json", "map.svg"] {
        let a = fs::read(tmp.path().join("w1").join(file)).unwrap();
        assert_eq!(a, fs::read(tmp.path().join("w4").join(file)).unwrap(), "{file}");
        assert_eq!(a, fs::read(tmp.path().join("w4b").join(file)).unwrap(), "{file}");
    }
}

#[test]
fn solve_below_lambda1_runs_the_nonexistence_probe() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "low.json",
        r#"{"domain": {"n": 128}, "model": {"lambda_over_lambda1": 0.5, "eps": 0.0}}"#,
    );
    let o = run(tmp.path(), &["solve", "--config", &cfg, "--out", "p"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = format!("{}{}", stdout(&o), stderr(&o)).to_lowercase();
    assert!(text.contains("hypothesis"), "{text}");
    assert!(!tmp.path().join("p/thresholds.json").exists());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("p/report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["message"].as_str().unwrap().to_lowercase().contains("hypothesis"));
}

#[test]
fn solve_writes_an_ordered_overlay() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "s.json", r#"{"domain": {"n": 128}}"#);
    let o = run(tmp.path(), &["solve", "--config", &cfg, "--out", "s"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["solution.csv", "report.json", "thresholds.json", "solution.svg"] {
        assert!(tmp.path().join("s").join(f).exists(), "{f}");
    }
    let csv = fs::read_to_string(tmp.path().join("s/solution.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,u"));
    assert_eq!(csv.lines().count(), 129);
    let svg = fs::read_to_string(tmp.path().join("s/solution.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="series""#).count(), 3);
    assert!(!svg.contains("href"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("s/report.json")).unwrap()).unwrap();
    assert_eq!(report["pair_ordered"], true);
}

#[test]
fn identical_configs_give_identical_files() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "s.json", r#"{"domain": {"n": 64}}"#);
    for out in ["a", "b"] {
        for cmd in ["eig", "torsion", "solve"] {
            let o = run(tmp.path(), &[cmd, "--config", &cfg, "--out", out]);
            assert_eq!(o.status.code(), Some(0), "{cmd}: {}", stderr(&o));
        }
    }
    let names: Vec<_> = fs::read_dir(tmp.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert!(names.len() >= 7);
    for name in names {
        assert_eq!(
            fs::read(tmp.path().join("a").join(&name)).unwrap(),
            fs::read(tmp.path().join("b").join(&name)).unwrap(),
            "{name:?}"
        );
    }
}

#[test]
fn eig_and_torsion_emit_csv_and_summary() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"domain": {"n": 64}, "operator": {"s": 0.25}}"#);
    assert_eq!(run(tmp.path(), &["eig", "--config", &cfg, "--out", "o"]).status.code(), Some(0));
    assert_eq!(run(tmp.path(), &["torsion", "--config", &cfg, "--out", "o"]).status.code(), Some(0));
    let eig: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("o/eig.json")).unwrap()).unwrap();
    assert!(eig["lambda1"].as_f64().unwrap() > 0.0);
    assert_eq!(fs::read_to_string(tmp.path().join("o/eig.csv")).unwrap().lines().count(), 65);
    assert_eq!(fs::read_to_string(tmp.path().join("o/torsion.csv")).unwrap().lines().count(), 65);
}

#[test]
fn dump_operator_writes_one_row_per_node() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"domain": {"n": 20}}"#);
    let o = run(tmp.path(), &["eig", "--config", &cfg, "--out", "o", "--dump-operator", "a.txt"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(tmp.path().join("a.txt")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 20);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.len(), 20);
        for (j, v) in r.iter().enumerate() {
            assert_eq!(*v, rows[j][i]);
        }
    }
}

#[test]
fn malformed_configs_are_usage_errors() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        ("syntax.json", "{not json"),
        ("unknown.json", r#"{"domain": {"n": 32, "m": 4}}"#),
        ("both.json", r#"{"model": {"lambda": 3.0, "lambda_over_lambda1": 2.0}}"#),
        ("tiny.json", r#"{"domain": {"n": 1}}"#),
        ("order.json", r#"{"operator": {"s": 1.0}}"#),
        ("interval.json", r#"{"domain": {"a": 1.0, "b": -1.0}}"#),
    ];
    for (name, body) in cases {
        let cfg = write_config(tmp.path(), name, body);
        let o = run(tmp.path(), &["eig", "--config", &cfg, "--out", "never"]);
        assert_eq!(o.status.code(), Some(2), "{name}: {}", stderr(&o));
    }
    assert_eq!(run(tmp.path(), &["eig", "--config", "missing.json"]).status.code(), Some(2));
    assert_eq!(run(tmp.path(), &["frobnicate"]).status.code(), Some(2));
    assert!(!tmp.path().join("never").exists());
}

#[test]
fn empty_sweep_is_an_error_not_an_empty_file() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "e.json",
        r#"{"sweep": {"x": {"param": "K", "values": []}, "y": {"param": "c", "values": [1.0]}}}"#,
    );
    let o = run(tmp.path(), &["sweep", "--config", &cfg, "--out", "m"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!tmp.path().join("m/map.csv").exists());
    assert!(!tmp.path().join("m/map.svg").exists());

    let same = write_config(
        tmp.path(),
        "same.json",
        r#"{"sweep": {"x": {"param": "K", "values": [0.5]}, "y": {"param": "K", "values": [0.6]}}}"#,
    );
    assert_eq!(run(tmp.path(), &["sweep", "--config", &same, "--out", "m"]).status.code(), Some(2));
}
