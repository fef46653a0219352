//! `hjflow verify`: the numeric certification suites at pinned tolerances.
//! Exit status is nonzero iff any margin is negative.

use std::path::Path;
use std::sync::Arc;

use hjflow::kernels::{build_kernel_table, kernel_pde_residual, write_kernel_csv, KernelKind};
use hjflow::signal::SineSignal;
use hjflow::verify::{
    backstepping_roundtrip, gevrey_bound_check, norm_lemma_check, observer_roundtrip,
    random_smooth_field, MarginReport,
};
use hjflow::{Field, Grid, Params};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::commands::{ensure_dir, write_file};
use crate::{EXIT_CHECK_FAILURE, EXIT_OK, EXIT_RUNTIME_ERROR};

const KERNEL_RESIDUAL_BOUND: f64 = 1e-3;
const KERNEL_DIAG_BOUND: f64 = 1e-12;
const KERNEL_ANTIDIAG_BOUND: f64 = 1e-14;
const ROUNDTRIP_BOUND: f64 = 1e-6;
const GEVREY_ORDER: usize = 8;

pub fn run(suite: &str, out: &Path) -> u8 {
    let mut report = MarginReport::default();
    let run_kernels = matches!(suite, "all" | "kernels");
    let run_gevrey = matches!(suite, "all" | "gevrey");
    let run_norms = matches!(suite, "all" | "norms");
    let run_roundtrips = matches!(suite, "all" | "roundtrips");
    if !(run_kernels || run_gevrey || run_norms || run_roundtrips) {
        eprintln!("error: unknown suite '{suite}' (expected all|kernels|gevrey|norms|roundtrips)");
        return EXIT_RUNTIME_ERROR;
    }
    if ensure_dir(out).is_err() {
        return EXIT_RUNTIME_ERROR;
    }

    if run_kernels {
        if let Err(s) = kernels_suite(&mut report, out) {
            return s;
        }
    }
    if run_gevrey {
        gevrey_suite(&mut report);
    }
    if run_norms {
        if let Err(s) = norms_suite(&mut report) {
            return s;
        }
    }
    if run_roundtrips {
        roundtrips_suite(&mut report);
    }

    let mut csv = Vec::new();
    if report.write_csv(&mut csv).is_err() {
        return EXIT_RUNTIME_ERROR;
    }
    if write_file(
        &out.join("report.csv"),
        &String::from_utf8(csv).expect("utf8"),
    )
    .is_err()
    {
        return EXIT_RUNTIME_ERROR;
    }

    let mut failures = 0usize;
    for r in &report.records {
        let status = if r.margin >= 0.0 { "pass" } else { "FAIL" };
        if r.margin < 0.0 {
            failures += 1;
        }
        println!(
            "{status} {:<18} {:<12} measured {:>12.5e}  bound {:>12.5e}",
            r.check, r.case, r.measured, r.bound
        );
    }
    println!(
        "verify suite '{suite}': {} checks, {failures} failures",
        report.records.len()
    );
    if failures == 0 {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILURE
    }
}

fn kernels_suite(report: &mut MarginReport, out: &Path) -> Result<(), u8> {
    for (name, kind) in [
        ("control", KernelKind::Control),
        ("observer", KernelKind::Observer),
    ] {
        let r = kernel_pde_residual(kind, 1.0, 0.25, 41).map_err(|e| {
            eprintln!("error: {e}");
            EXIT_RUNTIME_ERROR
        })?;
        report.push(
            "kernel_pde",
            format!("{name}_interior"),
            r.max_interior,
            KERNEL_RESIDUAL_BOUND,
        );
        report.push(
            "kernel_pde",
            format!("{name}_diagonal"),
            r.max_diag_error,
            KERNEL_DIAG_BOUND,
        );
        report.push(
            "kernel_pde",
            format!("{name}_antidiagonal"),
            r.max_antidiag_error,
            KERNEL_ANTIDIAG_BOUND,
        );
    }
    // diagonal law and antidiagonal zeros of the closed forms
    let (c1, eps) = (1.0, 0.25);
    let mut worst_diag = 0.0f64;
    let mut worst_anti = 0.0f64;
    for i in 0..=100 {
        let x = i as f64 / 100.0;
        let k = hjflow::kernels::control_kernel_k(x, x, c1, eps).expect("diagonal in domain");
        worst_diag = worst_diag.max((k + c1 / (2.0 * eps) * (x - 0.5)).abs());
        let anti = hjflow::kernels::control_kernel_k(x, 1.0 - x, c1, eps).expect("in domain");
        worst_anti = worst_anti.max(anti.abs());
    }
    report.push(
        "kernel_closed_form",
        "diagonal_law".into(),
        worst_diag,
        KERNEL_DIAG_BOUND,
    );
    report.push(
        "kernel_closed_form",
        "antidiagonal".into(),
        worst_anti,
        KERNEL_ANTIDIAG_BOUND,
    );

    let grid = Grid::new(101).expect("valid");
    let params = Params::traffic();
    let _ = build_kernel_table(grid, &params);
    let mut csv = Vec::new();
    write_kernel_csv(grid, &params, &mut csv).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_RUNTIME_ERROR
    })?;
    write_file(
        &out.join("kernel_table.csv"),
        &String::from_utf8(csv).expect("utf8"),
    )?;
    Ok(())
}

fn gevrey_suite(report: &mut MarginReport) {
    let f = Arc::new(SineSignal { amplitude: 0.25 });
    let ts: Vec<f64> = (0..256)
        .map(|i| i as f64 * std::f64::consts::TAU / 255.0)
        .collect();
    report.merge(gevrey_bound_check(f, 0.25, 1.0, 1.0, GEVREY_ORDER, &ts));
}

fn norms_suite(report: &mut MarginReport) -> Result<(), u8> {
    let params = Params::new(0.5, -1.0, 0.0, 1.0, 1.0).expect("valid");
    let grid = Grid::new(201).expect("valid");
    let u_ref = Field::zeros(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for case in 0..100 {
        let target = 0.5 * (case as f64 + 1.0) / 100.0;
        let ut = random_smooth_field(grid, &mut rng, target);
        let sub = norm_lemma_check(&ut, &u_ref, &params, 0.6).map_err(|e| {
            eprintln!("error: {e}");
            EXIT_RUNTIME_ERROR
        })?;
        report.merge(sub);
    }
    Ok(())
}

fn roundtrips_suite(report: &mut MarginReport) {
    for &n in &[101usize, 201, 401] {
        let g = Grid::new(n).expect("valid");
        let v = Field::from_fn(g, |x| 1.0 + (2.0 * std::f64::consts::PI * x).sin());
        let e = Field::from_fn(g, |x| (2.0 * std::f64::consts::PI * (x - 0.5)).cos());
        report.push(
            "roundtrip_control",
            format!("n={n}"),
            backstepping_roundtrip(&v, 1.0, 0.25),
            ROUNDTRIP_BOUND,
        );
        report.push(
            "roundtrip_observer",
            format!("n={n}"),
            observer_roundtrip(&e, 1.0, 0.25),
            ROUNDTRIP_BOUND,
        );
    }
}
