//! End-to-end tests of the `scaled-fields` binary: output contracts,
//! exit codes, determinism, and seed resolution.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_scaled-fields"));
    cmd.env_remove("SCALED_FIELDS_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn csv_column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

const INTEGRATE_EXP: &str = r#"{
  "dimension": 1,
  "theta": {"preset": "linear", "coeffs": [1.0]},
  "field": {"kind": "const", "value": 1.0},
  "quadrature": {"bounds": [[0.0, 1.0]], "cells": 256, "rule": "simpson"},
  "reference": [0.0]
}"#;

#[test]
fn integrate_matches_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "exp.json", INTEGRATE_EXP);
    let out = run(&["integrate", "--config", &config]);
    assert!(out.status.success(), "{}", stderr(&out));

    let text = stdout(&out);
    let re = csv_column(&text, "re");
    let e_minus_1 = std::f64::consts::E - 1.0;
    assert!((re[0] - 1.0).abs() <= 1e-12, "unscaled {}", re[0]);
    assert!((re[1] - e_minus_1).abs() <= 1e-8 * e_minus_1, "scaled {}", re[1]);
    assert!((re[2] - re[1] / re[0]).abs() <= 1e-15, "ratio {}", re[2]);
}

#[test]
fn constant_theta_gives_unit_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "flat.json",
        r#"{
          "dimension": 1,
          "theta": {"preset": "constant", "value": 3.25},
          "field": {"kind": "polynomial", "coeffs": [0.0, 0.0, 1.0]},
          "quadrature": {"bounds": [[0.0, 2.0]], "cells": 64, "rule": "trapezoid"},
          "reference": [0.5]
        }"#,
    );
    let out = run(&["integrate", "--config", &config]);
    assert!(out.status.success(), "{}", stderr(&out));
    let re = csv_column(&stdout(&out), "re");
    assert_eq!(re[2], 1.0, "constant theta must give ratio exactly 1");
}

#[test]
fn integrate_respects_cells_override_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "exp.json", INTEGRATE_EXP);
    let out_path = dir.path().join("result.csv");
    let out = run(&[
        "integrate",
        "--config",
        &config,
        "--cells",
        "8",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    // 8 cells leave a visibly larger but still small quadrature error.
    let re = csv_column(&text, "re");
    let e_minus_1 = std::f64::consts::E - 1.0;
    let dev = (re[1] - e_minus_1).abs();
    assert!(dev > 1e-12 && dev < 1e-5, "dev {dev}");
}

#[test]
fn grid_dump_writes_node_rows() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("grid.csv");
    let config = write_config(
        dir.path(),
        "dump.json",
        &format!(
            r#"{{
              "dimension": 1,
              "theta": {{"preset": "linear", "coeffs": [1.0]}},
              "quadrature": {{"bounds": [[0.0, 1.0]], "cells": 4, "rule": "simpson"}},
              "reference": [0.0],
              "grid_dump": "{}"
            }}"#,
            dump.display()
        ),
    );
    let out = run(&["integrate", "--config", &config]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&dump).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "u0,weight,integrand_re,integrand_im,factor");
    // 4 simpson cells on one axis = 5 nodes.
    assert_eq!(lines.len(), 6);
    let factors = csv_column(&text, "factor");
    assert!((factors[4] - std::f64::consts::E).abs() < 1e-12);
}

#[test]
fn verify_without_config_passes() {
    let out = run(&["verify"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["failed"], 0);
    assert!(report["total"].as_u64().unwrap() >= 50);
}

#[test]
fn verify_includes_config_chart_and_theta_suites() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "verify.json",
        r#"{
          "dimension": 1,
          "chart": {"preset": "tanh_warp", "scale": 1.0},
          "theta": {"preset": "gaussian_bump", "center": [0.0], "width": 1.5, "height": 0.8},
          "quadrature": {"bounds": [[-2.0, 2.0]], "cells": 32, "rule": "midpoint"},
          "reference": [0.0]
        }"#,
    );
    let out = run(&["verify", "--config", &config]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("charts/config/round_trip"));
    assert!(text.contains("theta/config/cocycle"));
}

#[test]
fn verify_surfaces_domain_errors_as_exit_1() {
    // Inflation theta sampled over a box that includes t <= 0.
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "bad_box.json",
        r#"{
          "dimension": 1,
          "theta": {"preset": "inflation", "t0": 1.0, "rate": 1.0, "plateau": 5.0},
          "quadrature": {"bounds": [[-1.0, 1.0]], "cells": 32, "rule": "midpoint"},
          "reference": [0.5]
        }"#,
    );
    let out = run(&["verify", "--config", &config]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert!(stderr(&out).contains("t > 0"), "{}", stderr(&out));
}

#[test]
fn odd_simpson_cells_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "odd.json",
        r#"{
          "dimension": 1,
          "theta": {"preset": "linear", "coeffs": [1.0]},
          "quadrature": {"bounds": [[0.0, 1.0]], "cells": 9, "rule": "simpson"},
          "reference": [0.0]
        }"#,
    );
    let out = run(&["integrate", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("even"), "{}", stderr(&out));
}

#[test]
fn cosmo_time_grid_with_zero_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "cosmo0.json",
        r#"{
          "dimension": 1,
          "theta": {"preset": "inflation", "t0": 1.0, "rate": 1.0, "plateau": 5.0},
          "cosmo": {"t_start": 0.0, "t_end": 2.0, "steps": 4, "t_present": 1.0}
        }"#,
    );
    let out = run(&["cosmo", "--config", &config]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("t > 0"), "{}", stderr(&out));
}

#[test]
fn unknown_config_fields_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "junk.json", r#"{"dimension": 1, "bogus": 1}"#);
    let out = run(&["integrate", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bogus"), "{}", stderr(&out));
}

#[test]
fn missing_config_exits_2() {
    let out = run(&["integrate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--config"), "{}", stderr(&out));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "exp.json", INTEGRATE_EXP);
    let a = run(&["integrate", "--config", &config]);
    let b = run(&["integrate", "--config", &config]);
    assert_eq!(a.stdout, b.stdout);

    let v1 = run(&["verify", "--seed", "42", "--format", "csv"]);
    let v2 = run(&["verify", "--seed", "42", "--format", "csv"]);
    assert_eq!(v1.stdout, v2.stdout);
}

#[test]
fn seed_comes_from_flag_env_or_default() {
    let flag = run(&["verify", "--seed", "7"]);
    let env = bin()
        .args(["verify"])
        .env("SCALED_FIELDS_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(flag.stdout, env.stdout);

    let garbage = bin()
        .args(["verify"])
        .env("SCALED_FIELDS_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(garbage.status.code(), Some(2));

    // The flag wins over a garbage environment value.
    let flagged = bin()
        .args(["verify", "--seed", "7"])
        .env("SCALED_FIELDS_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(flagged.status.code(), Some(0));
    assert_eq!(flagged.stdout, flag.stdout);
}

#[test]
fn cosmo_factor_column_ignores_theta_offset() {
    let dir = tempfile::tempdir().unwrap();
    let base = write_config(
        dir.path(),
        "base.json",
        r#"{
          "dimension": 1,
          "theta": {"preset": "inflation", "t0": 1.0, "rate": 1.0, "plateau": 5.0},
          "cosmo": {"t_start": 0.01, "t_end": 10.0, "steps": 32, "spacing": "log", "t_present": 14.0}
        }"#,
    );
    let shifted = write_config(
        dir.path(),
        "shifted.json",
        r#"{
          "dimension": 1,
          "theta": {"preset": "inflation", "t0": 1.0, "rate": 1.0, "plateau": 5.0, "offset": 5.0},
          "cosmo": {"t_start": 0.01, "t_end": 10.0, "steps": 32, "spacing": "log", "t_present": 14.0}
        }"#,
    );
    let a = run(&["cosmo", "--config", &base]);
    let b = run(&["cosmo", "--config", &shifted]);
    assert!(a.status.success() && b.status.success());
    let fa = csv_column(&stdout(&a), "factor");
    let fb = csv_column(&stdout(&b), "factor");
    for (x, y) in fa.iter().zip(&fb) {
        assert!((x - y).abs() <= 1e-12 * x.abs(), "{x} vs {y}");
    }
    // The factor column rises monotonically toward the present.
    assert!(fa.windows(2).all(|w| w[1] >= w[0]));
    assert!(fa[0] < 1e-3);
}

#[test]
fn du_check_reports_first_order_slope() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "du.json",
        r#"{
          "dimension": 1,
          "theta": {"preset": "linear", "coeffs": [1.0]},
          "du_check": {"at": [0.5], "axis": 0, "start": 0.01, "halvings": 8}
        }"#,
    );
    let out = run(&["du-check", "--config", &config, "--format", "json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let slope = report["slope"].as_f64().unwrap();
    assert!((slope - 1.0).abs() <= 0.05, "slope {slope}");
    assert_eq!(report["samples"].as_array().unwrap().len(), 8);
}

#[test]
fn derivative_reports_plain_and_extrapolated_values() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "deriv.json",
        r#"{
          "dimension": 1,
          "theta": {"preset": "linear", "coeffs": [0.6]},
          "field": {"kind": "const", "value": 1.0},
          "derivative": {"at": [1.0], "axis": 0, "step": 0.001}
        }"#,
    );
    let out = run(&["derivative", "--config", &config]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    // D of the constant section tends to (grad theta) psi = 0.6.
    let plain = csv_column(&text, "re")[0];
    let extrapolated = csv_column(&text, "richardson_re")[0];
    assert!((plain - 0.6).abs() < 1e-2, "plain {plain}");
    assert!((extrapolated - 0.6).abs() < (plain - 0.6).abs(), "richardson must improve");
}

#[test]
fn wavepacket_norm_matches_gaussian_integral() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "packet.json",
        r#"{
          "dimension": 1,
          "theta": {"preset": "constant", "value": 0.0},
          "field": {"kind": "gaussian", "center": [0.0], "width": 1.0},
          "quadrature": {"bounds": [[-3.0, 3.0]], "cells": 64, "rule": "midpoint"},
          "reference": [0.0]
        }"#,
    );
    let out = run(&["wavepacket", "--config", &config]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let contributions = csv_column(&text, "norm_contribution");
    assert_eq!(contributions.len(), 64);
    let norm_sq: f64 = contributions.iter().sum();
    // integral of e^{-2u^2} = sqrt(pi/2), truncation at |u|=3 negligible.
    let expect = (std::f64::consts::PI / 2.0).sqrt();
    assert!((norm_sq - expect).abs() < 1e-4, "norm_sq {norm_sq} vs {expect}");
}
