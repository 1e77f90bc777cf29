//! End-to-end tests of the `qet` binary: CSV contracts, exit codes, and the
//! verification runner.

use std::path::PathBuf;
use std::process::{Command, Output};

fn qet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("qet-cli-test-{}-{name}", std::process::id()))
}

fn stdout_value(output: &Output, key: &str) -> f64 {
    let text = String::from_utf8_lossy(&output.stdout);
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix(&format!("{key}=")) {
            return rest.parse().expect("numeric field");
        }
    }
    panic!("key {key} not found in output:\n{text}");
}

#[test]
fn sweep_row_count_and_header() {
    let out_path = temp_path("rows.csv");
    let output = qet(&[
        "sweep",
        "--alpha",
        "0.6",
        "--t-min",
        "0.4",
        "--t-max",
        "0.8",
        "--t-steps",
        "2",
        "--b-min",
        "0.2",
        "--b-max",
        "0.9",
        "--b-steps",
        "2",
        "--quantity",
        "extract",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let csv = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 5); // header + 2x2 grid
    assert_eq!(lines[0], "T,B,alpha,extract");
    // T-major ordering: the first two rows share the lower temperature.
    let first: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
    let second: f64 = lines[2].split(',').next().unwrap().parse().unwrap();
    assert_eq!(first, second);
    std::fs::remove_file(out_path).ok();
}

#[test]
fn sweep_is_byte_deterministic() {
    let first_path = temp_path("det1.csv");
    let second_path = temp_path("det2.csv");
    for (path, jobs) in [(&first_path, "1"), (&second_path, "4")] {
        let output = qet(&[
            "sweep",
            "--alpha",
            "1.0",
            "--t-steps",
            "6",
            "--b-steps",
            "6",
            "--quantity",
            "extract",
            "--quantity",
            "discord",
            "--quantity",
            "negativity",
            "--jobs",
            jobs,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(output.status.success());
    }
    let a = std::fs::read(&first_path).unwrap();
    let b = std::fs::read(&second_path).unwrap();
    assert_eq!(a, b);
    std::fs::remove_file(first_path).ok();
    std::fs::remove_file(second_path).ok();
}

#[test]
fn sweep_extract_vanishes_on_the_symmetric_line() {
    let out_path = temp_path("sym.csv");
    // B grid passes exactly through alpha = 0.6.
    let output = qet(&[
        "sweep",
        "--alpha",
        "0.6",
        "--t-min",
        "0.3",
        "--t-max",
        "0.3001",
        "--t-steps",
        "2",
        "--b-min",
        "0.2",
        "--b-max",
        "1.0",
        "--b-steps",
        "5",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let csv = std::fs::read_to_string(&out_path).unwrap();
    for line in csv.lines().skip(1) {
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        let (b, extract) = (fields[1], fields[3]);
        if (b - 0.6).abs() < 1e-12 {
            assert!(extract < 1e-12, "no extraction at B = alpha, got {extract}");
        } else {
            assert!(extract > 1e-9, "extraction expected at B = {b}");
        }
    }
    std::fs::remove_file(out_path).ok();
}

#[test]
fn sweep_rejects_bad_ranges_naming_the_flag() {
    let out = temp_path("never.csv");
    let cases: [(&[&str], &str); 3] = [
        (&["--t-min", "0"], "--t-min"),
        (&["--t-steps", "1"], "--t-steps"),
        (&["--b-steps", "20000"], "--b-steps"),
    ];
    for (extra, flag) in cases {
        let mut args = vec!["sweep", "--alpha", "0.6", "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let output = qet(&args);
        assert_eq!(output.status.code(), Some(2));
        let stderr = String::from_utf8_lossy(&output.stderr);
        assert!(stderr.contains(flag), "stderr should name {flag}: {stderr}");
    }
}

#[test]
fn sweep_rejects_unwritable_output() {
    let output = qet(&[
        "sweep",
        "--alpha",
        "0.6",
        "--t-steps",
        "2",
        "--b-steps",
        "2",
        "--out",
        "/nonexistent-dir/sweep.csv",
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("--out"));
}

#[test]
fn protocol_qee_report() {
    let output = qet(&["protocol", "--mode", "qee", "--b", "1", "--alpha", "0.6"]);
    assert!(output.status.success());
    assert!((stdout_value(&output, "delta_extract") - 0.083095).abs() < 1e-5);
    assert!((stdout_value(&output, "site_a") - 0.5).abs() < 1e-12);
    assert!(stdout_value(&output, "site_b").abs() < 1e-12);
    assert!(stdout_value(&output, "interaction").abs() < 1e-12);
}

#[test]
fn protocol_excited_report() {
    let output = qet(&["protocol", "--mode", "excited", "--b", "0.5", "--alpha", "1"]);
    assert!(output.status.success());
    assert!((stdout_value(&output, "alice_stage") + 0.5).abs() < 1e-12);
    assert!((stdout_value(&output, "delta_extract") - 1.059017).abs() < 1e-6);
}

#[test]
fn protocol_thermal_cold_limit() {
    let output = qet(&[
        "protocol", "--mode", "thermal", "--b", "0.5", "--alpha", "1", "--temp", "1e-3",
    ]);
    assert!(output.status.success());
    assert!((stdout_value(&output, "delta_extract") - 0.059017).abs() < 1e-4);
}

#[test]
fn protocol_exit_codes() {
    // qee needs B > alpha.
    let output = qet(&["protocol", "--mode", "qee", "--b", "0.5", "--alpha", "1"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("--b > --alpha"));

    // thermal needs --temp.
    let output = qet(&["protocol", "--mode", "thermal", "--b", "0.5", "--alpha", "1"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("--temp"));
}

#[test]
fn verify_passes_and_fault_injection_fails() {
    let output = qet(&["verify"]);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(
        output.status.success(),
        "verify should pass:\n{stdout}"
    );
    assert!(stdout.contains("[PASS]"));
    // Per-module summary lines.
    for module in ["qmatrix", "xy-model", "protocol", "correlations", "closedform", "acceptance"] {
        assert!(stdout.contains(&format!("{module}: ")), "summary for {module}");
    }

    let injected = qet(&["verify", "--tolerance-scale", "0"]);
    assert_eq!(injected.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&injected.stdout).contains("[FAIL]"));
}
