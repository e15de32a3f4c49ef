mod common;

use std::process::{Command, Output};

use common::fixture_path;

fn finsler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler"))
        .args(args)
        .env_remove("FINSLER_SEED")
        .output()
        .expect("binary runs")
}

fn spec(name: &str) -> String {
    fixture_path(name).display().to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn eval_reports_golden_diag_values() {
    let s = spec("fix_diag.json");
    let o = finsler(&["eval", "--spec", &s, "--x", "0,0", "--y", "1,2", "--json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let r = &v["result"];
    assert_eq!(r["a"].as_f64().unwrap(), 17.0);
    let fbar = r["kropina"]["fbar"].as_f64().unwrap();
    assert!((fbar - 17f64.sqrt()).abs() < 1e-12);
    assert!(r["kropina"]["aux"]["p0"].is_null());
    assert_eq!(r["warnings"][0], "degenerate_order_four");
    assert_eq!(v["spec_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn beta_zero_exits_three() {
    let s = spec("fix_diag_b11.json");
    let o = finsler(&["eval", "--spec", &s, "--x", "0,0", "--y", "1,-1"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("domain error"));
}

#[test]
fn bad_spec_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"dimension": 2, "order": 4, "tensor": [{"indices": [2,1,1,1], "poly": [{"exponents": [0,0], "coeff": 1}]}]}"#,
    )
    .unwrap();
    let p = path.display().to_string();
    let o = finsler(&["eval", "--spec", &p, "--x", "0,0", "--y", "1,1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not canonical"));
    assert_eq!(code(&finsler(&["eval", "--spec", &p])), 2);
}

#[test]
fn check_exit_codes() {
    let diag = spec("fix_diag.json");
    let o = finsler(&[
        "check",
        "dually-flat",
        "--spec",
        &diag,
        "--samples",
        "60",
        "--seed",
        "4",
    ]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("verdict flat-within-tol"));

    let bx = spec("fix_x_bx.json");
    let o = finsler(&[
        "check",
        "proj-related",
        "--spec",
        &bx,
        "--samples",
        "60",
        "--seed",
        "4",
    ]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("max wedge residual"));

    let o = finsler(&[
        "check",
        "dually-flat",
        "--spec",
        &diag,
        "--samples",
        "10",
        "--seed",
        "4",
    ]);
    assert_eq!(code(&o), 3, "too few samples for a verdict");
}

#[test]
fn reruns_are_byte_identical_and_seed_env_is_honoured() {
    let s = spec("fix_x_bx.json");
    let args = [
        "verify",
        "--spec",
        &s,
        "--samples",
        "50",
        "--seed",
        "11",
        "--json",
    ];
    let (a, b) = (finsler(&args), finsler(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);

    let run_env = |seed: &str, extra: &[&str]| {
        let mut args = vec![
            "check",
            "proj-flat",
            "--spec",
            &s,
            "--samples",
            "5",
            "--json",
        ];
        args.extend_from_slice(extra);
        let o = Command::new(env!("CARGO_BIN_EXE_finsler"))
            .args(&args)
            .env("FINSLER_SEED", seed)
            .output()
            .unwrap();
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v["seed"].as_u64().unwrap()
    };
    assert_eq!(run_env("77", &[]), 77);
    assert_eq!(run_env("77", &["--seed", "5"]), 5);
}

#[test]
fn geodesic_writes_path_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("path.txt");
    let o = out.display().to_string();
    let s = spec("fix_x.json");
    let r = finsler(&[
        "geodesic", "--spec", &s, "--metric", "kropina", "--x0", "0,0", "--y0", "1,1", "--t",
        "0.5", "--steps", "20", "--out", &o,
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# t x1 x2 v1 v2"));
    assert_eq!(lines.count(), 21);

    let diag = spec("fix_bm.json");
    let none = finsler(&[
        "geodesic", "--spec", &s, "--metric", "base", "--x0", "0,0", "--y0", "-1,1.2", "--t", "3",
        "--steps", "30", "--out", &o,
    ]);
    assert_eq!(code(&none), 3, "leaving the domain truncates");
    let wrong_dim = finsler(&[
        "geodesic", "--spec", &diag, "--x0", "0,0", "--y0", "1,1", "--t", "1", "--steps", "4",
        "--out", &o,
    ]);
    assert_eq!(code(&wrong_dim), 2);
}
