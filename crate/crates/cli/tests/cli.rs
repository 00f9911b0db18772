use std::path::Path;
use std::process::{Command, Output};

use fpent::sweep::SweepResult;
use serde_json::Value;

fn fpent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpent")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(&fpent(args))).unwrap()
}

fn without_timestamp(csv: &str) -> String {
    csv.lines().filter(|l| !l.starts_with("# timestamp:")).collect::<Vec<_>>().join("\n")
}

#[test]
fn entropy_report_fields() {
    let v = json(&["entropy", "--dist", "uniform:a=-1,b=1", "--p", "3", "--E", "2"]);
    assert!((v["approx_H_s"].as_f64().unwrap() - 4.94).abs() < 5e-3);
    for k in ["exact_H", "approx_H_tilde", "closed_form_H_s", "p_overflow", "p_underflow"] {
        assert!(v[k].is_number(), "{k}");
    }
    for k in ["differential_entropy", "expected_log_bin_size", "expected_log_smooth_bin_size", "abs_log_moment"] {
        assert!(v["components"][k].is_number(), "{k}");
    }
    assert_eq!(v["precision"], 3);
}

#[test]
fn entropy_csv() {
    let out = stdout(&fpent(&["entropy", "--dist", "gaussian:sigma=1", "--precision", "3", "--exponent-bits", "4", "--format", "csv"]));
    let body: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body.len(), 2);
    assert!(body[0].starts_with("exact_H,approx_H_tilde,approx_H_s,closed_form_H_s"));
    let exact: f64 = body[1].split(',').next().unwrap().parse().unwrap();
    assert!((exact - 5.457525951222917).abs() < 1e-9, "{exact}");
}

#[test]
fn grid_dump() {
    let out = stdout(&fpent(&["grid", "--p", "2", "--E", "2"]));
    assert!(out.starts_with("# tool: fpent\n"));
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "index,value,lower,upper,width");
    assert_eq!(rows.len(), 1 + 16);
    // Largest value 2^2 * 1.5 = 6; its bin is clipped at G = 7.
    assert_eq!(rows[16], "15,6.0,5.0,7.0,2.0");
    let v = json(&["grid", "--p", "2", "--E", "2", "--format", "json"]);
    assert_eq!(v["bins"].as_array().unwrap().len(), 16);
}

#[test]
fn scale_sweep_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scale.csv");
    let p = path.to_str().unwrap();
    let args = [
        "sweep", "--mode", "scale", "--dist", "gaussian:sigma=1", "--p", "3", "--E", "4", "--points", "500", "--min",
        "1e-12", "--max", "1e12", "--out", p,
    ];
    stdout(&fpent(&args));
    let text = std::fs::read_to_string(&path).unwrap();
    let r = SweepResult::from_csv(&text).unwrap();
    assert_eq!(r.rows.len(), 500);
    assert_eq!(r.meta("mode"), Some("scale"));
    assert!(r.meta("timestamp").is_some());
    let h = r.column("exact_H").unwrap();
    let best = h.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!((best - 5.46).abs() < 0.05, "{best}");
    // Only the output file is left in the directory.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn precision_sweep_offset() {
    let out = stdout(&fpent(&["sweep", "--mode", "precision", "--dist", "gaussian:sigma=1", "--E", "7", "--p-min", "1", "--p-max", "8"]));
    let r = SweepResult::from_csv(&out).unwrap();
    assert_eq!(r.rows.len(), 8);
    for row in r.rows.iter().filter(|r| r.precision >= 3) {
        assert!((row.values[0] - row.precision as f64 - 2.46).abs() < 0.03);
    }
}

#[test]
fn multi_distribution_sweep() {
    let out = stdout(&fpent(&[
        "sweep", "--mode", "exponent", "--dist", "gaussian:sigma=1", "--dist", "laplace:b=1", "--dist",
        "gamma:alpha=2,theta=1", "--p", "3", "--e-min", "2", "--e-max", "5", "--quantities", "exact,approx-s,bounds",
    ]));
    let r = SweepResult::from_csv(&out).unwrap();
    assert_eq!(r.rows.len(), 12);
    assert_eq!(r.metadata.iter().filter(|(k, _)| k == "dist").count(), 3);
    let (lo, kl, hi) = (r.column("kl_lower").unwrap(), r.column("kl").unwrap(), r.column("kl_upper").unwrap());
    for i in 0..12 {
        assert!(lo[i] <= kl[i] + 1e-9 && kl[i] <= hi[i] + 1e-9);
    }
}

#[test]
fn sweep_bytes_are_reproducible() {
    let args = [
        "sweep", "--mode", "scale", "--dist", "t:nu=3,s=1", "--p", "4", "--E", "3", "--points", "25", "--min",
        "1e-3", "--max", "1e3", "--quantities", "exact,mc", "--samples", "20000", "--seed", "9",
    ];
    let one = Command::new(env!("CARGO_BIN_EXE_fpent")).args(args).env("FPENT_THREADS", "1").output().unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_fpent")).args(args).env("FPENT_THREADS", "4").output().unwrap();
    assert_eq!(without_timestamp(&stdout(&one)), without_timestamp(&stdout(&many)));
}

#[test]
fn bounds_report_and_per_bin() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bins.csv");
    let v = json(&["bounds", "--dist", "gaussian:sigma=1", "--p", "2", "--E", "2", "--per-bin", path.to_str().unwrap()]);
    let k = &v["kl_bounds"];
    let (lo, kl, hi) = (k["lower"].as_f64().unwrap(), k["kl"].as_f64().unwrap(), k["upper"].as_f64().unwrap());
    assert!(lo <= kl && kl <= hi);
    assert!((kl - 0.022299).abs() < 1e-5, "{kl}");
    let s = &v["smoothing"];
    assert!(s["observed_gap"].as_f64().unwrap() <= s["bound"].as_f64().unwrap());
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "index,lower,upper,p,g,lambda,kl,upper_bound,lower_bound");
    assert_eq!(rows.len(), 1 + 16);
}

#[test]
fn monte_carlo_is_seeded() {
    let args = ["mc", "--dist", "gaussian:sigma=1", "--p", "3", "--E", "4", "--samples", "200000", "--seed", "4", "--bias-correction"];
    let a = json(&args);
    let b = json(&args);
    assert_eq!(a, b);
    let est = a["estimate"].as_f64().unwrap();
    let exact = a["exact_H"].as_f64().unwrap();
    assert!((est - exact).abs() < 4.0 * a["std_error"].as_f64().unwrap());
    let v = json(&["mc", "--cov", "1,0.5;0.5,1", "--p", "3", "--E", "4", "--samples", "50000"]);
    assert!(v["estimate"].as_f64().unwrap() > 9.0);
}

#[test]
fn usage_errors_exit_2() {
    let cases: [&[&str]; 6] = [
        &["entropy", "--dist", "cauchy:gamma=1", "--p", "3", "--E", "2"],
        &["entropy", "--dist", "gaussian:sigma=-1", "--p", "3", "--E", "2"],
        &["entropy", "--dist", "gaussian:sigma=1", "--p", "30", "--E", "4"],
        &["sweep", "--mode", "scale", "--dist", "gaussian:sigma=1", "--p", "3", "--E", "4"],
        &["mc", "--cov", "1,2;2,1", "--p", "3", "--E", "4"],
        &["frobnicate"],
    ];
    for args in cases {
        let o = fpent(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    let o = fpent(&["entropy", "--dist", "cauchy:gamma=1", "--p", "3", "--E", "2"]);
    let msg = String::from_utf8_lossy(&o.stderr);
    assert!(msg.contains("gaussian:sigma") && msg.contains("pareto:xm,alpha"), "{msg}");
}

#[test]
fn numerical_failure_exits_3_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.json");
    let o = fpent(&["bounds", "--dist", "gaussian:sigma=1", "--p", "20", "--E", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("kl_bounds"));
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn unwritable_output_is_an_error() {
    let o = fpent(&["grid", "--p", "1", "--E", "1", "--out", "/nonexistent-dir/grid.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!Path::new("/nonexistent-dir/grid.csv").exists());
}
