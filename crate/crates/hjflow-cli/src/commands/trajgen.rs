//! `hjflow trajgen`: evaluate the reference trajectory and feedforward
//! inputs over an (x, t) lattice, write them as CSV, and report the
//! measured smallness margin.

use std::path::{Path, PathBuf};

use hjflow::trajgen::{reference_profile, series_reference};
use hjflow::{Error, Grid};

use crate::commands::{ensure_dir, write_file};
use crate::config::FileConfig;
use crate::{plots, EXIT_CHECK_FAILURE, EXIT_OK, EXIT_RUNTIME_ERROR};

pub fn run(cfg_path: &Path, out: Option<PathBuf>, grid_n: Option<usize>, t_end: Option<f64>) -> u8 {
    let mut cfg = match FileConfig::load(cfg_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME_ERROR;
        }
    };
    if let Some(dir) = out {
        cfg.output.dir = dir;
    }
    if let Some(n) = grid_n {
        cfg.grid.n = n;
    }
    if let Some(te) = t_end {
        cfg.time.t_end = te;
    }
    match generate(&cfg) {
        Ok(margin) => {
            println!(
                "trajgen '{}': smallness margin {margin:.6} ({})",
                cfg.scenario.name,
                if margin > 0.0 {
                    "condition satisfied"
                } else {
                    "outside the small-reference regime"
                }
            );
            EXIT_OK
        }
        Err((status, msg)) => {
            eprintln!("error: {msg}");
            status
        }
    }
}

fn generate(cfg: &FileConfig) -> Result<f64, (u8, String)> {
    let params = cfg
        .params()
        .map_err(|e| (EXIT_RUNTIME_ERROR, e.to_string()))?;
    let grid = Grid::new(cfg.grid.n).map_err(|e| (EXIT_RUNTIME_ERROR, e.to_string()))?;
    let reference = cfg
        .reference()
        .map_err(|e| (EXIT_RUNTIME_ERROR, e.to_string()))?;
    let plan = match reference {
        hjflow::sim::Reference::Sine { d, x0 } => {
            hjflow::trajgen::sine_plan(d, x0, cfg.reference.k_max, cfg.reference.term_tol)
        }
        hjflow::sim::Reference::Traffic => {
            hjflow::trajgen::traffic_plan(cfg.reference.k_max, cfg.reference.term_tol)
        }
        hjflow::sim::Reference::Custom(p) => Ok(p),
    }
    .map_err(|e| (EXIT_RUNTIME_ERROR, e.to_string()))?;

    ensure_dir(&cfg.output.dir).map_err(|s| (s, "output directory".into()))?;

    let n_t = 201usize;
    let dt_out = (cfg.time.t_end - cfg.time.t0) / (n_t as f64 - 1.0);
    let mut ur_csv = String::from("t,x,ur,urx\n");
    let mut inputs_csv = String::from("t,U0r,U1r\n");
    let mut sup_vr = 0.0f64;
    for it in 0..n_t {
        let t = cfg.time.t0 + it as f64 * dt_out;
        let (vr, vr_x) = series_reference(&plan, &params, t, grid).map_err(|e| match e {
            Error::Truncation { .. } => (EXIT_CHECK_FAILURE, e.to_string()),
            other => (EXIT_RUNTIME_ERROR, other.to_string()),
        })?;
        sup_vr = sup_vr.max(hjflow::quad::sup_norm(&vr));
        let prof = reference_profile(&vr, &vr_x, &params).map_err(|e| {
            (
                EXIT_CHECK_FAILURE,
                format!("reference infeasible at t = {t}: {e}"),
            )
        })?;
        for i in 0..grid.n() {
            ur_csv.push_str(&format!(
                "{t:.12e},{:.12e},{:.12e},{:.12e}\n",
                grid.node(i),
                prof.ur.get(i),
                prof.urx.get(i)
            ));
        }
        inputs_csv.push_str(&format!("{t:.12e},{:.12e},{:.12e}\n", prof.u0r, prof.u1r));
    }
    let margin = (-params.ab_over_2eps().abs()).exp() - sup_vr;

    write_file(&cfg.output.dir.join("ur_field.csv"), &ur_csv).map_err(|s| (s, "csv".into()))?;
    write_file(&cfg.output.dir.join("inputs.csv"), &inputs_csv).map_err(|s| (s, "csv".into()))?;
    write_file(
        &cfg.output.dir.join("effective.toml"),
        &cfg.effective_toml(),
    )
    .map_err(|s| (s, "config echo".into()))?;
    write_file(
        &cfg.output.dir.join("fig_trajectory.gp"),
        plots::TRAJECTORY_GP,
    )
    .map_err(|s| (s, "plot template".into()))?;
    Ok(margin)
}
