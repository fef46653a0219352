//! `hjflow simulate`: closed-loop runs with CSV outputs and a summary of
//! tracking error, fitted decay rates and control effort.

use std::path::{Path, PathBuf};

use hjflow::sim::{run_closed_loop, Controller, SimResult};
use hjflow::verify::{fit_decay_rate, DecayFit};

use crate::commands::{ensure_dir, write_file};
use crate::config::FileConfig;
use crate::{plots, EXIT_OK, EXIT_RUNTIME_ERROR};

pub fn run(
    cfg_path: &Path,
    out: Option<PathBuf>,
    grid_n: Option<usize>,
    dt: Option<f64>,
    t_end: Option<f64>,
) -> u8 {
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
    if let Some(d) = dt {
        cfg.time.dt = d;
    }
    if let Some(te) = t_end {
        cfg.time.t_end = te;
    }
    match simulate(&cfg) {
        Ok(summary) => {
            print!("{summary}");
            EXIT_OK
        }
        Err((s, msg)) => {
            eprintln!("error: {msg}");
            s
        }
    }
}

fn csv_to_string(write: impl Fn(&mut Vec<u8>) -> std::io::Result<()>) -> String {
    let mut buf = Vec::new();
    write(&mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("csv is utf8")
}

fn fitted_rate_text(result: &SimResult) -> String {
    let t_last = *result.times.last().unwrap_or(&0.0);
    let t_first = *result.times.first().unwrap_or(&0.0);
    let mid = 0.5 * (t_first + t_last);
    let fmt = |fit: DecayFit| match fit {
        DecayFit::Rate(r) => format!("{r:.4}"),
        DecayFit::Saturated => "saturated".into(),
    };
    let mut text = format!(
        "fitted decay rate of h1(w) over [{mid:.2}, {t_last:.2}]: {}\n",
        fmt(fit_decay_rate(&result.times, &result.h1_w, mid, t_last))
    );
    if let Some(h1_e) = &result.h1_e {
        text.push_str(&format!(
            "fitted decay rate of h1(e) over [{mid:.2}, {t_last:.2}]: {}\n",
            fmt(fit_decay_rate(&result.times, h1_e, mid, t_last))
        ));
    }
    text
}

fn simulate(cfg: &FileConfig) -> Result<String, (u8, String)> {
    let sim_cfg = cfg
        .sim_config()
        .map_err(|e| (EXIT_RUNTIME_ERROR, e.to_string()))?;
    ensure_dir(&cfg.output.dir).map_err(|s| (s, "output directory".into()))?;

    let result = run_closed_loop(&sim_cfg).map_err(|e| (EXIT_RUNTIME_ERROR, e.to_string()))?;
    write_file(
        &cfg.output.dir.join("scalars.csv"),
        &csv_to_string(|buf| hjflow::sim::write_scalar_csv(&result, buf)),
    )
    .map_err(|s| (s, "scalars.csv".into()))?;
    write_file(
        &cfg.output.dir.join("fields.csv"),
        &csv_to_string(|buf| hjflow::sim::write_fields_csv(&result, buf)),
    )
    .map_err(|s| (s, "fields.csv".into()))?;
    write_file(
        &cfg.output.dir.join("effective.toml"),
        &cfg.effective_toml(),
    )
    .map_err(|s| (s, "config echo".into()))?;
    for (name, body) in [
        ("fig_tracking.gp", plots::TRACKING_GP),
        ("fig_density.gp", plots::DENSITY_GP),
        ("fig_effort.gp", plots::EFFORT_GP),
    ] {
        write_file(&cfg.output.dir.join(name), body).map_err(|s| (s, name.into()))?;
    }

    let final_err = (result.u.last().expect("records").last()
        - result.u_ref.last().expect("records").last())
    .abs();
    let mut summary = format!(
        "scenario '{}': {} steps recorded, t in [{:.2}, {:.2}]\n\
         final output tracking error |u(1,T) - ur(1,T)| = {final_err:.6e}\n\
         max |U0| = {:.6}, max |U1| = {:.6}\n",
        cfg.scenario.name,
        result.times.len(),
        result.times.first().unwrap_or(&0.0),
        result.times.last().unwrap_or(&0.0),
        result.max_abs_u0,
        result.max_abs_u1,
    );
    summary.push_str(&fitted_rate_text(&result));

    if cfg.scenario.compare_unilateral {
        let uni_cfg = hjflow::sim::SimConfig {
            controller: Controller::Unilateral,
            ..sim_cfg
        };
        let uni = run_closed_loop(&uni_cfg).map_err(|e| (EXIT_RUNTIME_ERROR, e.to_string()))?;
        write_file(
            &cfg.output.dir.join("uni_scalars.csv"),
            &csv_to_string(|buf| hjflow::sim::write_scalar_csv(&uni, buf)),
        )
        .map_err(|s| (s, "uni_scalars.csv".into()))?;
        summary.push_str(&format!(
            "unilateral baseline: max |U1| = {:.6} (ratio unilateral/bilateral = {:.4})\n",
            uni.max_abs_u1,
            uni.max_abs_u1 / result.max_abs_u1,
        ));
    }
    write_file(&cfg.output.dir.join("summary.txt"), &summary)
        .map_err(|s| (s, "summary.txt".into()))?;
    Ok(summary)
}
