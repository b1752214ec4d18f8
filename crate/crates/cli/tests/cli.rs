use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaosgen"))
        .args(args)
        .current_dir(dir)
        .env("CHAOSGEN_OUTPUT_DIR", dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn csv_column(path: &Path) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn generate_uniform_rows() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &[
            "generate", "--map", "logistic", "--law", "uniform", "--n", "10", "--seed", "7",
        ],
    );
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(dir.path().join("samples.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("value"));
    let v = csv_column(&dir.path().join("samples.csv"));
    assert_eq!(v.len(), 10);
    assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
    let doc = stdout_json(&out);
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["summary"]["provenance"]["map"], "logistic(lambda=4)");
}

#[test]
fn generate_exponential_support_and_determinism() {
    let dir = TempDir::new().unwrap();
    let args = |name: &'static str| {
        [
            "generate",
            "--map",
            "gauss",
            "--law",
            "exponential",
            "--rate",
            "1",
            "--n",
            "1000",
            "--seed",
            "7",
            "--output",
            name,
        ]
    };
    assert_eq!(code(&run(dir.path(), &args("a.csv"))), 0);
    assert_eq!(code(&run(dir.path(), &args("b.csv"))), 0);
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    let v = csv_column(&dir.path().join("a.csv"));
    assert_eq!(v.len(), 1000);
    assert!(v.iter().all(|&x| x >= 0.0));
}

#[test]
fn generate_json_and_vectors() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &[
            "generate",
            "--law",
            "bernoulli",
            "--p",
            "0.3",
            "--n",
            "50",
            "--dim",
            "3",
            "--format",
            "json",
        ],
    );
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("samples.json")).unwrap()).unwrap();
    let values = doc["values"].as_array().unwrap();
    assert_eq!(values.len(), 150);
    assert!(values.iter().all(|v| v == 0.0 || v == 1.0));
    assert_eq!(doc["summary"]["dim"], 3);
}

#[test]
fn usage_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    assert_eq!(
        code(&run(
            p,
            &["generate", "--map", "henon", "--law", "uniform", "--n", "10"]
        )),
        1
    );
    assert_eq!(code(&run(p, &["generate", "--law", "uniform"])), 1);
    assert_eq!(code(&run(p, &["generate", "--law", "cauchy", "--n", "3"])), 1);
    assert_eq!(
        code(&run(
            p,
            &["generate", "--law", "exponential", "--rate", "-1", "--n", "3"]
        )),
        1
    );
    assert_eq!(
        code(&run(
            p,
            &["generate", "--map", "logistic", "--lambda", "3.9", "--law", "uniform", "--n", "3"]
        )),
        1
    );
    assert_eq!(code(&run(p, &["verify", "--suite", "fp", "--map", "henon"])), 1);
    assert_eq!(code(&run(p, &["frobnicate"])), 1);
    assert_eq!(code(&run(p, &["--help"])), 0);
    assert_eq!(code(&run(p, &["--version"])), 0);
}

#[test]
fn verify_fp_logistic_passes() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["verify", "--suite", "fp", "--map", "logistic"]);
    assert_eq!(code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["pass"], true);
    assert!(doc["checks"][0]["max_residual"].as_f64().unwrap() < 1e-9);
    let saved: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(saved, doc);
}

#[test]
fn verify_birkhoff_gauss() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &["verify", "--suite", "birkhoff", "--map", "gauss", "--n", "1000000"],
    );
    assert_eq!(code(&out), 0);
    let report = &stdout_json(&out)["checks"][0]["report"];
    let reference = report["reference"].as_f64().unwrap();
    assert!((reference - 1.5f64.log2()).abs() < 1e-9);
    assert!((report["time_average"].as_f64().unwrap() - reference).abs() < 0.01);
}

#[test]
fn verification_failure_exits_3() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &[
            "verify",
            "--suite",
            "sensitivity",
            "--map",
            "logistic",
            "--lambda",
            "2.5",
        ],
    );
    assert_eq!(code(&out), 3);
    let doc = stdout_json(&out);
    assert_eq!(doc["pass"], false);
    assert!(doc["checks"][0]["mean_exponent"].as_f64().unwrap() < 0.0);
}

#[test]
fn henon_dimension_and_divergence() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &[
            "henon",
            "--a",
            "1.4",
            "--b",
            "0.3",
            "--n",
            "1000000",
            "--dimension",
            "--no-cloud",
        ],
    );
    assert_eq!(code(&out), 0);
    let slope = stdout_json(&out)["dimension"]["slope"].as_f64().unwrap();
    assert!((1.21..=1.31).contains(&slope), "{slope}");
    assert!(!dir.path().join("henon_cloud.csv").exists());

    assert_eq!(code(&run(dir.path(), &["henon", "--a", "3", "--n", "10"])), 2);
}

#[test]
fn henon_cloud_and_grid_files() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &["henon", "--n", "2000", "--grid", "8", "--summary", "fit.json"],
    );
    assert_eq!(code(&out), 0);
    let cloud = fs::read_to_string(dir.path().join("henon_cloud.csv")).unwrap();
    assert_eq!(cloud.lines().next(), Some("x,y"));
    assert_eq!(cloud.lines().count(), 2001);
    let grid = fs::read_to_string(dir.path().join("henon_density.csv")).unwrap();
    assert_eq!(grid.lines().count(), 65);
    assert!(dir.path().join("fit.json").exists());
}

#[test]
fn gbm_zero_volatility_paths_coincide() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["gbm", "--sigma", "0", "--paths", "4", "--steps", "10"]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(dir.path().join("gbm_paths.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("time,path_id,price"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 44);
    for r in &rows {
        let t: f64 = r[0].parse().unwrap();
        let s: f64 = r[2].parse().unwrap();
        assert_eq!(s, 100.0 * (0.05 * t).exp());
    }
}

#[test]
fn gbm_summary_only_skips_paths() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["gbm", "--paths", "500", "--summary-only"]);
    assert_eq!(code(&out), 0);
    assert!(!dir.path().join("gbm_paths.csv").exists());
    assert_eq!(stdout_json(&out)["summary"]["n_paths"], 500);
}

#[test]
fn test_subcommand_reports_ks() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    assert_eq!(
        code(&run(
            p,
            &["generate", "--law", "uniform", "--n", "5000", "--output", "batch.csv"]
        )),
        0
    );
    let out = run(p, &["test", "--input", "batch.csv", "--tests", "ks"]);
    assert_eq!(code(&out), 0);
    let doc = stdout_json(&out);
    let reports = doc["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0]["test"], "ks");
    let d = reports[0]["statistic"].as_f64().unwrap();
    assert!(d > 0.0 && d < 0.05);
    assert!(p.join("test.json").exists());

    // uniform data against a normal reference fails
    assert_eq!(
        code(&run(p, &["test", "--input", "batch.csv", "--reference", "normal"])),
        3
    );
    assert_eq!(code(&run(p, &["test", "--input", "missing.csv"])), 1);
    assert_eq!(code(&run(p, &["test", "--input", "batch.csv", "--column", "nope"])), 1);

    fs::write(p.join("flat.csv"), "value\n".to_string() + &"2.5\n".repeat(20)).unwrap();
    assert_eq!(code(&run(p, &["test", "--input", "flat.csv", "--tests", "jb"])), 2);
}

#[test]
fn writes_leave_no_temporaries() {
    let dir = TempDir::new().unwrap();
    run(dir.path(), &["generate", "--law", "normal", "--n", "100"]);
    run(dir.path(), &["verify", "--suite", "fp", "--map", "tent"]);
    let mut names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(names, ["samples.csv", "verify.json"]);
}
