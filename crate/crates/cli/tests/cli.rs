use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ewpo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ewpo"))
        .args(args)
        .env_remove("EWPO_THREADS")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--out", "json"]);
    let out = ewpo(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

/// Deterministic scattered data with an endogenous disturbance.
fn synthetic(n: usize, endogeneity: f64) -> String {
    let mut text = String::from("x,y,g\n");
    for i in 0..n {
        let t = i as f64;
        let e = (t * 1.618_033_988_7).fract() * 2.0 - 1.0;
        let v = (t * 0.754_877_666_2).fract() * 2.0 - 1.0;
        let x = 3.0 + 4.0 * (t * 0.414_213_562_4).fract() + e;
        let u = endogeneity * e + v;
        let g = 1.0 + (t * 0.302_775_637_7).fract();
        text.push_str(&format!("{x},{},{g}\n", 1.0 + 0.5 * x + u));
    }
    text
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn noiseless_line_estimate() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "line.csv", "x,y\n0,-1\n1,1\n2,3\n3,5\n4,7\n");
    let r = json(&["estimate", "--data", &data, "--scheme", "full", "--weight", "absdx", "--method", "avg"]);
    assert_eq!(r["tool"], "ewpo-cli");
    assert!((f(&r["result"]["beta1_hat"]) - 2.0).abs() < 1e-12);
    assert!((f(&r["result"]["beta0_hat"]) + 1.0).abs() < 1e-12);

    let out = ewpo(&["estimate", "--data", &data, "--out", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("parameter,estimate"));
    assert!(text.contains("beta1,2"));
}

#[test]
fn every_scheme_recovers_a_noiseless_line() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "line.csv", "x,y\n3,5\n0,-1\n4,7\n1,1\n2.5,4\n");
    for scheme in ["adjacent", "full"] {
        for weight in ["dx", "absdx", "euclid", "sqrtabsdx"] {
            for method in ["avg", "loss"] {
                let r = json(&[
                    "estimate", "--data", &data, "--scheme", scheme, "--weight", weight, "--method", method, "--sorted",
                ]);
                assert!((f(&r["result"]["beta1_hat"]) - 2.0).abs() < 1e-12, "{scheme} {weight} {method}");
            }
        }
    }
}

#[test]
fn noiseless_plane_with_two_regressors() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("y,a,b\n");
    for i in 0..12 {
        let a = i as f64;
        let b = ((i * 7) % 5) as f64 + 0.5 * (i % 3) as f64;
        text.push_str(&format!("{},{a},{b}\n", 2.0 + 1.5 * a - 0.75 * b));
    }
    let data = write(&dir, "plane.csv", &text);
    let r = json(&["estimate", "--data", &data, "--x", "a,b"]);
    let beta = r["result"]["beta_hat"].as_array().unwrap();
    assert!((f(&beta[0]) - 1.5).abs() < 1e-10);
    assert!((f(&beta[1]) + 0.75).abs() < 1e-10);
    assert!((f(&r["result"]["beta0_hat"]) - 2.0).abs() < 1e-10);
}

#[test]
fn data_errors_exit_with_code_three() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "d.csv", "x,y\n0,1\n1,NaN\n2,3\n");
    let out = ewpo(&["estimate", "--data", &data]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("row 2"), "{}", stderr(&out));

    let out = ewpo(&["estimate", "--data", &data, "--x", "w"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("`w`"));

    let missing = dir.path().join("absent.csv");
    let out = ewpo(&["estimate", "--data", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_with_code_two() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "s.csv", &synthetic(60, 0.0));

    let out = ewpo(&["estimate", "--data", &data, "--weight", "median"]);
    assert_eq!(out.status.code(), Some(2));

    let out = ewpo(&["test", "--data", &data, "--null", "brownian", "--weight", "absdx"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains("signed dx") && msg.contains("jackknife"), "{msg}");

    let out = ewpo(&["test", "--data", &data, "--kind", "covariance", "--method", "loss"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("forces the statistic to zero"));

    let out = ewpo(&["test", "--data", &data, "--kind", "residual", "--intercept", "means"]);
    assert_eq!(out.status.code(), Some(2));

    let out = ewpo(&["estimate", "--data", &data, "--threads", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numeric_errors_exit_with_code_four() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "tied.csv", "x,y\n1,1\n1,2\n1,3\n");
    let out = ewpo(&["estimate", "--data", &data]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

/// `n⁻² Σ_{i>j} Δx Δû` from the reported coefficients.
fn covariance_oracle(data: &str, beta0: f64, beta1: f64) -> f64 {
    let mut reader = csv::Reader::from_path(data).unwrap();
    let rows: Vec<(f64, f64)> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect();
    let n = rows.len();
    let u: Vec<f64> = rows.iter().map(|(x, y)| y - beta0 - beta1 * x).collect();
    let mut acc = 0.0;
    for i in 1..n {
        for j in 0..i {
            acc += (rows[i].0 - rows[j].0) * (u[i] - u[j]);
        }
    }
    acc / (n * n) as f64
}

#[test]
fn covariance_test_with_jackknife_null() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "endo.csv", &synthetic(200, 1.5));
    let r = json(&[
        "test", "--data", &data, "--kind", "covariance", "--null", "jackknife", "--weight", "absdx", "--jk-reps", "400",
        "--seed", "11",
    ]);
    let result = &r["result"];
    let report = &result["report"];
    assert_eq!(report["null_source"], "jackknife");
    assert_eq!(report["weight_kind"], "absdx");
    let cv = &report["critical_values"];
    let (lo, hi, stat) = (f(&cv["lower"]), f(&cv["upper"]), f(&report["statistic"]));
    assert!(lo < 0.0 && hi > 0.0 && lo < hi);
    assert_eq!(report["reject"].as_bool().unwrap(), stat < lo || stat > hi);

    let oracle = covariance_oracle(&data, f(&result["fit"]["beta0_hat"]), f(&result["fit"]["beta1_hat"]));
    assert!((stat - oracle).abs() <= 1e-10 * (1.0 + oracle.abs()), "{stat} vs {oracle}");
    assert_eq!(r["seed"], 11);
    assert_eq!(r["invocation"]["jackknife"]["seed"], 11);
}

#[test]
fn residual_test_reports_bias_correction() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "endo.csv", &synthetic(300, 1.5));
    let r = json(&["test", "--data", &data, "--kind", "residual"]);
    let result = &r["result"];
    assert_eq!(result["report"]["null_source"], "analytic-t");
    assert_eq!(r["invocation"]["estimator"]["intercept"], "zero");
    assert_eq!(f(&result["fit"]["beta0_hat"]), 0.0);
    let p = f(&result["report"]["p_value"]);
    assert!((0.0..=1.0).contains(&p));
    let delta = f(&result["report"]["delta_hat"]);
    let corrected = f(&result["bias_corrected_slope"]);
    assert!((corrected - (f(&result["fit"]["beta1_hat"]) - delta)).abs() < 1e-12);
}

#[test]
fn reports_rerun_to_identical_numbers() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "s.csv", &synthetic(120, 0.5));
    let commands: Vec<Vec<&str>> = vec![
        vec!["estimate", "--data", &data, "--scheme", "adjacent", "--weight", "sqrtabsdx"],
        vec!["jackknife", "--data", &data, "--reps", "300", "--seed", "5"],
        vec!["test", "--data", &data, "--jk-reps", "200"],
        vec!["simulate-cv", "--prop", "1", "--steps", "200", "--reps", "2000", "--alphas", "0.1,0.05"],
        vec!["iv-screen", "--data", &data, "--candidates", "g"],
    ];
    for (k, cmd) in commands.iter().enumerate() {
        let first = json(cmd);
        let path = write(&dir, &format!("report{k}.json"), &first.to_string());
        let again = json(&["rerun", &path, "--check"]);
        assert_eq!(first["result"], again["result"], "{cmd:?}");
        assert_eq!(first["invocation"], again["invocation"]);
    }
}

#[test]
fn rerun_check_detects_tampering() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "line.csv", "x,y\n0,-1\n1,1\n2,3\n");
    let mut report = json(&["estimate", "--data", &data]);
    report["result"]["beta1_hat"] = Value::from(2.5);
    let path = write(&dir, "r.json", &report.to_string());
    let out = ewpo(&["rerun", &path, "--check"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "s.csv", &synthetic(150, 0.0));
    let one = json(&["jackknife", "--data", &data, "--reps", "500", "--threads", "1"]);
    let four = json(&["jackknife", "--data", &data, "--reps", "500", "--threads", "4"]);
    assert_eq!(one["result"], four["result"]);
}

#[test]
fn simulate_cv_writes_table_and_draws() {
    let dir = TempDir::new().unwrap();
    let draws = dir.path().join("draws.csv");
    let r = json(&[
        "simulate-cv", "--prop", "2", "--steps", "200", "--reps", "1500", "--alphas", "0.05,0.10", "--draws",
        draws.to_str().unwrap(),
    ]);
    let rows = r["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(f(&rows[0]["alpha"]), 0.05);
    assert!(f(&rows[0]["lower"]) < f(&rows[1]["lower"]));
    assert!(f(&rows[0]["upper"]) > f(&rows[1]["upper"]));
    let text = std::fs::read_to_string(&draws).unwrap();
    assert_eq!(text.lines().count(), 1501);

    let out = ewpo(&["simulate-cv", "--prop", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn montecarlo_from_spec_file() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "exp.toml",
        r#"
seed = 3
reps = 200
target = "estimator"

[estimator]
scheme = { kind = "adjacent", sorted = false }
weight = "absdx"
method = "avg"

[dgp]
beta0 = 1.0
beta1 = 0.5
x = { dist = "uniform", a = -10.0, b = 10.0 }
u = { dist = "normal", variance = 1.0 }
ns = [100]
rhos = [0.0, 0.5]
"#,
    );
    let draws = dir.path().join("mc.csv");
    let r = json(&["montecarlo", "--spec", &spec, "--draws", draws.to_str().unwrap()]);
    let rows = r["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["label"], "Exogen");
    assert!((f(&rows[0]["mean"]) - 0.5).abs() < 0.02);
    assert_eq!(r["seed"], 3);
    let lines = std::fs::read_to_string(&draws).unwrap();
    assert_eq!(lines.lines().count(), 1 + 2 * 200);
    assert!(lines.starts_with("n,rho,label,replicate,value\n"));

    // --seed overrides the file and is what gets recorded.
    let r2 = json(&["montecarlo", "--spec", &spec, "--seed", "4"]);
    assert_eq!(r2["invocation"]["experiment"]["seed"], 4);
    assert_ne!(r["result"]["rows"][0]["mean"], r2["result"]["rows"][0]["mean"]);

    let bad = write(&dir, "bad.toml", "seed = 1\nreps = 200\ntarget = \"estimator\"\nbogus = 1\n");
    assert_eq!(ewpo(&["montecarlo", "--spec", &bad]).status.code(), Some(2));
}

#[test]
fn iv_screen_ranks_candidates() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "s.csv", &synthetic(150, 1.0));
    let r = json(&["iv-screen", "--data", &data, "--candidates", "g,x"]);
    let entries = r["result"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 3);
    assert_eq!(entries.iter().filter(|e| e["selected"] == true).count(), 1);
    assert_eq!(entries[0]["selected"], true);
    let stats: Vec<f64> = entries.iter().filter_map(|e| e["statistic"].as_f64()).map(f64::abs).collect();
    assert!(stats.windows(2).all(|w| w[0] <= w[1]));
    assert!(Path::new(&data).exists());
}
