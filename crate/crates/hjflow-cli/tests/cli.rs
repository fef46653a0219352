//! End-to-end tests of the hjflow binary: exit codes, CSV layouts,
//! determinism, and the closed-form values behind the trajgen outputs.

use std::path::Path;
use std::process::{Command, Output};

fn hjflow(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hjflow"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const SINE_TRAJGEN: &str = r#"
[scenario]
name = "sine"

[params]
epsilon = 0.5
a = -1.0
b = 0.0
c1 = 1.0
c2 = 1.0

[grid]
n = 101

[time]
t_end = 6.283185307179586

[reference]
family = "sine"
d = 0.25
x0 = 0.5
k_max = 25
term_tol = 1e-12

[output]
dir = "sine_out"
"#;

#[test]
fn trajgen_sine_matches_closed_forms() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sine.toml", SINE_TRAJGEN);
    let out = hjflow(&["trajgen", "--config", cfg.to_str().unwrap()], tmp.path());
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("smallness margin"), "stdout: {stdout}");

    // margin for d = 0.25 is about +0.7497
    let margin: f64 = stdout
        .split("margin ")
        .nth(1)
        .and_then(|s| s.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((margin - 0.7497).abs() < 0.01, "margin {margin}");

    // spot-check the ur field against the closed form eps*ln(1 + g1)
    let text = std::fs::read_to_string(tmp.path().join("sine_out/ur_field.csv")).unwrap();
    let mut checked = 0;
    for line in text.lines().skip(1).step_by(97) {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let (t, x, ur) = (cells[0], cells[1], cells[2]);
        let s = 1.0f64; // sqrt(2 eps)
        let th = (x - 0.5) / s;
        let g1 = 0.25 / (2.0 * 0.5f64.sqrt())
            * (th.exp() * (t + th - std::f64::consts::FRAC_PI_4).sin()
                - (-th).exp() * (t - th - std::f64::consts::FRAC_PI_4).sin());
        let oracle = 0.5 * (1.0 + g1).ln();
        assert!(
            (ur - oracle).abs() <= 1e-8,
            "ur({x},{t}) = {ur} vs {oracle}"
        );
        checked += 1;
    }
    assert!(checked > 50);

    // inputs.csv against the closed-form feedforward law at x = 0
    let inputs = std::fs::read_to_string(tmp.path().join("sine_out/inputs.csv")).unwrap();
    for line in inputs.lines().skip(1).step_by(41) {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let (t, u0r) = (cells[0], cells[1]);
        let th = 0.5f64;
        let g1_0 = 0.25 / (2.0 * 0.5f64.sqrt())
            * ((-th).exp() * (t - th - std::f64::consts::FRAC_PI_4).sin()
                - th.exp() * (t + th - std::f64::consts::FRAC_PI_4).sin());
        let oracle = 0.25 / 2.0
            * ((-0.5f64).exp() * (t - 0.5).sin() + 0.5f64.exp() * (t + 0.5).sin())
            / (1.0 + g1_0);
        assert!((u0r - oracle).abs() <= 1e-8, "U0r({t}) = {u0r} vs {oracle}");
    }

    // the effective configuration is echoed
    assert!(tmp.path().join("sine_out/effective.toml").exists());
    assert!(tmp.path().join("sine_out/fig_trajectory.gp").exists());
}

#[test]
fn trajgen_zero_reference_writes_zeros() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "zero.toml",
        &SINE_TRAJGEN.replace("d = 0.25", "d = 0.0"),
    );
    let out = hjflow(&["trajgen", "--config", cfg.to_str().unwrap()], tmp.path());
    assert!(out.status.success());
    let text = std::fs::read_to_string(tmp.path().join("sine_out/ur_field.csv")).unwrap();
    for line in text.lines().skip(1) {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells[2], 0.0);
        assert_eq!(cells[3], 0.0);
    }
}

#[test]
fn trajgen_infeasible_amplitude_fails_with_status_one() {
    let tmp = tempfile::tempdir().unwrap();
    // the feasibility threshold for this family is d* ~ 0.9986
    let cfg = write_config(
        tmp.path(),
        "big.toml",
        &SINE_TRAJGEN.replace("d = 0.25", "d = 1.2"),
    );
    let out = hjflow(&["trajgen", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(
        out.status.code(),
        Some(1),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("infeasible"), "stderr: {stderr}");
}

#[test]
fn trajgen_bad_config_fails_with_status_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "broken.toml", "[params]\nepsilon = \"soup\"\n");
    let out = hjflow(&["trajgen", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    // toml errors carry line/column context
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line"), "stderr: {stderr}");
}

const TRAFFIC_SHORT: &str = r#"
[scenario]
name = "traffic"
compare_unilateral = true

[grid]
n = 101

[time]
t_end = 2.0

[output]
dir = "traffic_out"
"#;

#[test]
fn simulate_traffic_writes_results_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "traffic.toml", TRAFFIC_SHORT);
    let out = hjflow(&["simulate", "--config", cfg.to_str().unwrap()], tmp.path());
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("final output tracking error"));
    assert!(stdout.contains("ratio unilateral/bilateral"));

    // the unilateral baseline works harder at x = 1
    let ratio: f64 = stdout
        .split("ratio unilateral/bilateral = ")
        .nth(1)
        .and_then(|s| s.split(')').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(
        ratio > 1.0,
        "expected unilateral effort above bilateral, ratio {ratio}"
    );

    let dir = tmp.path().join("traffic_out");
    for file in [
        "scalars.csv",
        "fields.csv",
        "uni_scalars.csv",
        "summary.txt",
        "effective.toml",
    ] {
        assert!(dir.join(file).exists(), "{file} missing");
    }
    // density column converges toward 1/2
    let fields = std::fs::read_to_string(dir.join("fields.csv")).unwrap();
    let last_rows: Vec<&str> = fields.lines().rev().take(50).collect();
    for row in last_rows {
        let cells: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(
            (cells[3] - 0.5).abs() < 0.05,
            "rho = {} far from 1/2",
            cells[3]
        );
    }
}

#[test]
fn simulate_observer_records_estimation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "obs.toml",
        &format!("{TRAFFIC_SHORT}\n[controller]\nkind = \"output_feedback\"\n")
            .replace("compare_unilateral = true", "compare_unilateral = false"),
    );
    let out = hjflow(&["simulate", "--config", cfg.to_str().unwrap()], tmp.path());
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let scalars = std::fs::read_to_string(tmp.path().join("traffic_out/scalars.csv")).unwrap();
    let header = scalars.lines().next().unwrap();
    assert!(header.ends_with("h1_e"));
    // both tracking and estimation errors decay over the run
    let first: Vec<f64> = scalars
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    let last: Vec<f64> = scalars
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    assert!(
        last[5] < 0.2 * first[5],
        "h1_err {} -> {}",
        first[5],
        last[5]
    );
    assert!(last[8] < 0.2 * first[8], "h1_e {} -> {}", first[8], last[8]);
}

#[test]
fn simulate_outputs_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "det.toml",
        &TRAFFIC_SHORT
            .replace("t_end = 2.0", "t_end = 0.5")
            .replace("compare_unilateral = true", "compare_unilateral = false"),
    );
    let out1 = hjflow(
        &["simulate", "--config", cfg.to_str().unwrap(), "--out", "a"],
        tmp.path(),
    );
    let out2 = hjflow(
        &["simulate", "--config", cfg.to_str().unwrap(), "--out", "b"],
        tmp.path(),
    );
    assert!(out1.status.success() && out2.status.success());
    for file in ["scalars.csv", "fields.csv"] {
        let a = std::fs::read(tmp.path().join("a").join(file)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn simulate_accepts_cli_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "ovr.toml",
        &TRAFFIC_SHORT.replace("compare_unilateral = true", "compare_unilateral = false"),
    );
    let out = hjflow(
        &[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--grid-n",
            "51",
            "--t-end",
            "0.2",
            "--dt",
            "5e-4",
        ],
        tmp.path(),
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let effective = std::fs::read_to_string(tmp.path().join("traffic_out/effective.toml")).unwrap();
    assert!(effective.contains("n = 51"));
    assert!(effective.contains("t_end = 0.2"));
}

#[test]
fn multiple_configs_run_in_parallel_workers() {
    let tmp = tempfile::tempdir().unwrap();
    let short = TRAFFIC_SHORT
        .replace("t_end = 2.0", "t_end = 0.2")
        .replace("compare_unilateral = true", "compare_unilateral = false");
    let cfg_a = write_config(tmp.path(), "a.toml", &short.replace("traffic_out", "out_a"));
    let cfg_b = write_config(tmp.path(), "b.toml", &short.replace("traffic_out", "out_b"));
    let out = hjflow(
        &[
            "simulate",
            "--config",
            cfg_a.to_str().unwrap(),
            cfg_b.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert!(out.status.success());
    assert!(tmp.path().join("out_a/scalars.csv").exists());
    assert!(tmp.path().join("out_b/scalars.csv").exists());
}

#[test]
fn verify_all_passes_and_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hjflow(&["verify", "--suite", "all", "--out", "vout"], tmp.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = std::fs::read_to_string(tmp.path().join("vout/report.csv")).unwrap();
    assert!(report.starts_with("check,case,measured,bound,margin"));
    assert!(report.lines().count() > 50);
    assert!(tmp.path().join("vout/kernel_table.csv").exists());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("0 failures"));
}

#[test]
fn verify_selected_suite_only() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hjflow(
        &["verify", "--suite", "gevrey", "--out", "vout"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let report = std::fs::read_to_string(tmp.path().join("vout/report.csv")).unwrap();
    assert!(report.contains("gevrey_g"));
    assert!(!report.contains("roundtrip_control"));
}

#[test]
fn verify_rejects_unknown_suite() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hjflow(
        &["verify", "--suite", "everything", "--out", "vout"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}
