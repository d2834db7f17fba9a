//! End-to-end tests of the `qnd` binary: exit codes, output schemas, and
//! byte-level determinism, driven through real config files.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qnd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).expect("config written");
    path.to_str().expect("utf-8 path").to_string()
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn stderr_text(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

const VERIFY_M1: &str = r#"{
  "schema_version": 1,
  "mode": "verify",
  "system": { "omega": 1.0 },
  "bath": { "kind": "oscillator", "modes": [ { "omega": 1.0, "g": 0.4 } ] }
}"#;

#[test]
fn verify_single_mode_default_config_passes_below_1e8() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "config.json", VERIFY_M1);
    let out = dir.path().join("out");
    let result = qnd(&["--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(exit_code(&result), 0, "stderr: {}", stderr_text(&result));

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], serde_json::Value::Bool(true));
    assert!(summary["max_residual"].as_f64().unwrap() < 1e-8);
    // The PRNG seed is recorded so failures are reproducible.
    assert_eq!(summary["seed"].as_u64(), Some(0));

    let csv = fs::read_to_string(out.join("verify.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "draw,quantity,sector,t,cutoff,residual"
    );
    // Default draws = 4, both sectors each.
    assert_eq!(lines.count(), 8);
}

#[test]
fn kernel_grid_at_zero_time_emits_identity_row() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "config.json",
        r#"{
          "schema_version": 1,
          "mode": "kernel",
          "system": { "omega": 1.0 },
          "bath": { "kind": "oscillator", "modes": [ { "omega": 1.0, "g": 0.4 } ] },
          "time_grid": { "t_start": 0.0, "t_end": 1.0, "n_points": 1 }
        }"#,
    );
    let out = dir.path().join("out");
    let result = qnd(&["--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(exit_code(&result), 0, "stderr: {}", stderr_text(&result));

    let csv = fs::read_to_string(out.join("kernel.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "t,bath_prefactor_re,bath_prefactor_im,sector_up_re,sector_up_im,\
         sector_down_re,sector_down_im,element_up_re,element_up_im,\
         element_down_re,element_down_im"
    );
    assert_eq!(lines.len(), 2, "one grid point, one data row");
    let values: Vec<f64> = lines[1]
        .split(',')
        .map(|v| v.parse().expect("numeric column"))
        .collect();
    // At t = 0 with vacuum endpoints every kernel factor is exactly 1.
    let expected = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
    assert_eq!(values, expected);
}

#[test]
fn malformed_config_exits_1_and_names_parse_location() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "broken.json", "{ \"schema_version\": 1, \"mode\"");
    let result = qnd(&["--config", &config]);
    assert_eq!(exit_code(&result), 1);
    let message = stderr_text(&result);
    assert!(
        message.contains("line") && message.contains("column"),
        "diagnostic should name the parse location: {message}"
    );
}

#[test]
fn unknown_field_is_named_in_the_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "config.json",
        r#"{
          "schema_version": 1,
          "mode": "verify",
          "system": { "omega": 1.0 },
          "bath": { "kind": "oscillator", "modes": [ { "omega": 1.0, "g": 0.4 } ] },
          "time_gird": { "t_start": 0.0, "t_end": 1.0, "n_points": 3 }
        }"#,
    );
    let result = qnd(&["--config", &config]);
    assert_eq!(exit_code(&result), 1);
    assert!(
        stderr_text(&result).contains("time_gird"),
        "diagnostic should quote the unknown field: {}",
        stderr_text(&result)
    );
}

#[test]
fn spin_bath_rejects_coherent_endpoints_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "config.json",
        r#"{
          "schema_version": 1,
          "mode": "kernel",
          "system": { "omega": 1.0 },
          "bath": { "kind": "spin", "modes": [ { "omega": 1.0, "c": 0.4 } ] },
          "endpoints": { "alpha": [[0.1, 0.0]] },
          "time_grid": { "t_start": 0.0, "t_end": 1.0, "n_points": 3 }
        }"#,
    );
    let result = qnd(&["--config", &config]);
    assert_eq!(exit_code(&result), 1);
    assert!(stderr_text(&result).contains("endpoints.alpha"));
}

#[test]
fn identical_configs_give_byte_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "config.json", VERIFY_M1);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let result = qnd(&["--config", &config, "--out", out.to_str().unwrap()]);
        assert_eq!(exit_code(&result), 0, "stderr: {}", stderr_text(&result));
    }
    for name in ["verify.csv", "summary.json"] {
        let a = fs::read(out_a.join(name)).unwrap();
        let b = fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} must be byte-identical across runs");
    }
}

#[test]
fn unreachable_tolerance_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "config.json", VERIFY_M1);
    let out = dir.path().join("out");
    let result = qnd(&[
        "--config",
        &config,
        "--out",
        out.to_str().unwrap(),
        "--tol",
        "1e-30",
    ]);
    assert_eq!(exit_code(&result), 2);
    // Outputs are still written so the failure can be inspected.
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], serde_json::Value::Bool(false));
}

#[test]
fn truncation_cap_exits_3_with_achieved_bound() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "config.json",
        r#"{
          "schema_version": 1,
          "mode": "dephasing",
          "system": { "omega": 1.0 },
          "bath": { "kind": "oscillator", "modes": [ { "omega": 0.4, "g": 1.8 } ] },
          "time_grid": { "t_start": 0.0, "t_end": 3.0, "n_points": 5 },
          "tolerances": { "max_fock": 8 }
        }"#,
    );
    let result = qnd(&["--config", &config, "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(exit_code(&result), 3);
    let message = stderr_text(&result);
    assert!(
        message.contains("population"),
        "diagnostic should state the achieved bound: {message}"
    );
}

#[test]
fn dephasing_csv_carries_matching_oracle_column() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "config.json",
        r#"{
          "schema_version": 1,
          "mode": "dephasing",
          "system": { "omega": 1.0 },
          "bath": { "kind": "oscillator", "modes": [ { "omega": 1.0, "g": 0.4 } ] },
          "time_grid": { "t_start": 0.0, "t_end": 2.0, "n_points": 5 }
        }"#,
    );
    let out = dir.path().join("out");
    let result = qnd(&["--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(exit_code(&result), 0, "stderr: {}", stderr_text(&result));

    let csv = fs::read_to_string(out.join("dephasing.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "t,ratio_abs,ratio_phase,oracle_ratio_abs,oracle_ratio_phase,residual,fock_cutoff"
    );
    assert_eq!(lines.len(), 6);
    for line in &lines[1..] {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 7);
        let analytic: f64 = cols[1].parse().unwrap();
        let oracle: f64 = cols[3].parse().unwrap();
        let residual: f64 = cols[5].parse().unwrap();
        assert!((analytic - oracle).abs() < 1e-8);
        assert!(residual < 1e-8);
        let _cutoff: usize = cols[6].parse().unwrap();
    }
}

#[test]
fn structure_mode_reports_pass_for_both_bath_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let oscillator = write_config(
        dir.path(),
        "oscillator.json",
        r#"{
          "schema_version": 1,
          "mode": "structure",
          "system": { "omega": 1.0 },
          "bath": { "kind": "oscillator", "modes": [ { "omega": 1.0, "g": 0.4 } ] },
          "endpoints": { "alpha": [[0.2, 0.1]], "alpha_prime": [[0.1, 0.0]] },
          "time_grid": { "t_start": 0.0, "t_end": 1.7, "n_points": 2 }
        }"#,
    );
    let spin = write_config(
        dir.path(),
        "spin.json",
        r#"{
          "schema_version": 1,
          "mode": "structure",
          "system": { "omega": 1.2 },
          "bath": { "kind": "spin", "modes": [ { "omega": 0.9, "c": 1.1 } ] },
          "endpoints": { "sector": "down" }
        }"#,
    );
    for (config, expected_checks) in [(&oscillator, 5), (&spin, 3)] {
        let out = dir.path().join(format!("out{expected_checks}"));
        let result = qnd(&["--config", config, "--out", out.to_str().unwrap()]);
        assert_eq!(exit_code(&result), 0, "stderr: {}", stderr_text(&result));
        let report: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join("structure.json")).unwrap())
                .unwrap();
        assert_eq!(report["pass"], serde_json::Value::Bool(true));
        assert_eq!(report["checks"].as_array().unwrap().len(), expected_checks);
    }
}

#[test]
fn mode_flag_overrides_config_mode() {
    let dir = tempfile::tempdir().unwrap();
    // Config says kernel; the flag reroutes the same file to structure mode.
    let config = write_config(
        dir.path(),
        "config.json",
        r#"{
          "schema_version": 1,
          "mode": "kernel",
          "system": { "omega": 1.2 },
          "bath": { "kind": "spin", "modes": [ { "omega": 0.9, "c": 1.1 } ] },
          "time_grid": { "t_start": 0.0, "t_end": 2.0, "n_points": 3 }
        }"#,
    );
    let out = dir.path().join("out");
    let result = qnd(&[
        "--config",
        &config,
        "--mode",
        "structure",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&result), 0, "stderr: {}", stderr_text(&result));
    assert!(out.join("structure.json").exists());
    assert!(!out.join("kernel.csv").exists());
}

#[test]
fn missing_mode_everywhere_exits_1_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "config.json",
        r#"{
          "schema_version": 1,
          "system": { "omega": 1.0 },
          "bath": { "kind": "oscillator", "modes": [ { "omega": 1.0, "g": 0.4 } ] }
        }"#,
    );
    let result = qnd(&["--config", &config]);
    assert_eq!(exit_code(&result), 1);
    assert!(stderr_text(&result).contains("mode"));
}

#[test]
fn seed_flag_changes_the_drawn_comparisons() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "config.json", VERIFY_M1);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for (out, seed) in [(&out_a, "0"), (&out_b, "99")] {
        let result = qnd(&[
            "--config",
            &config,
            "--out",
            out.to_str().unwrap(),
            "--seed",
            seed,
        ]);
        assert_eq!(exit_code(&result), 0, "stderr: {}", stderr_text(&result));
    }
    let a = fs::read_to_string(out_a.join("verify.csv")).unwrap();
    let b = fs::read_to_string(out_b.join("verify.csv")).unwrap();
    assert_ne!(a, b, "different seeds must draw different comparisons");
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_b.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"].as_u64(), Some(99));
}
