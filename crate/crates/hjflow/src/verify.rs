//! Numeric certification of the analytical machinery: backstepping
//! roundtrips, Lyapunov decay fits, Gevrey derivative bounds, norm-gain
//! estimates, and the linearization residual of simulated runs.
//!
//! Every check is deterministic given its inputs and produces
//! machine-readable records (name, case, measured, bound, margin).

use std::io::Write;
use std::sync::Arc;

use rand::Rng;

use crate::error::Result;
use crate::grid::{Field, Grid};
use crate::params::Params;
use crate::quad::{derivative, h1_norm, integrate_slice, sup_norm};
use crate::signal::{ExpSignal, LinComboSignal, ProductSignal, Signal};
use crate::sim::SimResult;
use crate::transforms::{alpha1, error_transform, hopf_cole_forward, spatial_weight, Weight};
use crate::volterra::IntegralOperator;

/// One certified quantity: measured value against its bound.
#[derive(Debug, Clone)]
pub struct CheckRecord {
    pub check: String,
    pub case: String,
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, Default)]
pub struct MarginReport {
    pub records: Vec<CheckRecord>,
}

impl MarginReport {
    pub fn push(&mut self, check: &str, case: String, measured: f64, bound: f64) {
        self.records.push(CheckRecord {
            check: check.to_string(),
            case,
            measured,
            bound,
            margin: bound - measured,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.margin >= 0.0)
    }

    pub fn merge(&mut self, other: MarginReport) {
        self.records.extend(other.records);
    }

    /// CSV with columns check,case,measured,bound,margin.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "check,case,measured,bound,margin")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{:.12e},{:.12e},{:.12e}",
                r.check, r.case, r.measured, r.bound, r.margin
            )?;
        }
        Ok(())
    }
}

/// Apply the direct control transform then its inverse; returns
/// sup |v_recovered − v|.
pub fn backstepping_roundtrip(v: &Field, c1: f64, eps: f64) -> f64 {
    let g = v.grid();
    let direct = IntegralOperator::control_direct(g, c1, eps);
    let inverse = IntegralOperator::control_inverse(g, c1, eps);
    let rec = inverse.apply(&direct.apply(v));
    rec.values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max)
}

/// Observer analogue: inverse transform (J₁ mirror) then the direct one;
/// returns sup |e_recovered − e|.
pub fn observer_roundtrip(e: &Field, c2: f64, eps: f64) -> f64 {
    let g = e.grid();
    let direct = IntegralOperator::observer_direct(g, c2, eps);
    let inverse = IntegralOperator::observer_inverse(g, c2, eps);
    let rec = direct.apply(&inverse.apply(e));
    rec.values()
        .iter()
        .zip(e.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max)
}

/// Outcome of an exponential decay fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayFit {
    /// Fitted decay rate (positive for decaying data).
    Rate(f64),
    /// Data at or below the numerical floor; no rate is meaningful.
    Saturated,
}

/// Least-squares slope of ln(values) over `t ∈ [t_lo, t_hi]`; returns the
/// slope magnitude. Values below 1e−14 saturate the fit.
pub fn fit_decay_rate(times: &[f64], values: &[f64], t_lo: f64, t_hi: f64) -> DecayFit {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= t_lo && **t <= t_hi)
        .map(|(t, v)| (*t, *v))
        .collect();
    if pts.len() < 2 || pts.iter().any(|(_, v)| *v < 1e-14) {
        return DecayFit::Saturated;
    }
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|(t, _)| t).sum::<f64>() / n;
    let mean_ln = pts.iter().map(|(_, v)| v.ln()).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, v) in &pts {
        num += (t - mean_t) * (v.ln() - mean_ln);
        den += (t - mean_t) * (t - mean_t);
    }
    DecayFit::Rate((num / den).abs())
}

/// Decay certificate of the Lyapunov functional S₁ over the second half of
/// the recorded horizon. S₁ is quadratic, so the per-state rate is the
/// fitted slope magnitude divided by two.
#[derive(Debug, Clone, Copy)]
pub struct DecayReport {
    pub fitted: DecayFit,
    pub target: f64,
}

impl DecayReport {
    pub fn passes(&self) -> bool {
        matches!(self.fitted, DecayFit::Rate(r) if r >= self.target)
    }
}

pub fn lyapunov_decay(result: &SimResult, target_rate: f64) -> DecayReport {
    let t_last = *result.times.last().unwrap_or(&0.0);
    let t_first = *result.times.first().unwrap_or(&0.0);
    let t_mid = 0.5 * (t_first + t_last);
    let fitted = match fit_decay_rate(&result.times, &result.s1_w, t_mid, t_last) {
        DecayFit::Rate(r) => DecayFit::Rate(r / 2.0),
        DecayFit::Saturated => DecayFit::Saturated,
    };
    DecayReport {
        fitted,
        target: target_rate,
    }
}

/// Check the Gevrey bounds for g = e^f − 1 (constants F₁ = F·e^F,
/// M₁ = M·e^F) and h = e^f·f (constants F₂ = F(1 + F·e^F),
/// M₂ = (1 + F·e^F)·M·e^F) up to derivative order `n_max` over the given
/// time samples, with derivatives assembled by the exact recurrences.
pub fn gevrey_bound_check(
    f: Arc<dyn Signal>,
    big_f: f64,
    big_m: f64,
    gamma: f64,
    n_max: usize,
    t_samples: &[f64],
) -> MarginReport {
    let mut report = MarginReport::default();
    let e: Arc<dyn Signal> = Arc::new(ExpSignal::new(f.clone(), 1.0));
    let g = LinComboSignal {
        terms: vec![(1.0, e.clone())],
        constant: -1.0,
    };
    let h = ProductSignal { left: e, right: f };

    let f1 = big_f * big_f.exp();
    let m1 = big_m * big_f.exp();
    let f2 = big_f * (1.0 + big_f * big_f.exp());
    let m2 = (1.0 + big_f * big_f.exp()) * big_m * big_f.exp();

    let factorial = |n: usize| (1..=n).map(|i| i as f64).product::<f64>().max(1.0);
    for n in 0..=n_max {
        let meas_g = t_samples
            .iter()
            .map(|&t| g.derivative(n, t).abs())
            .fold(0.0f64, f64::max);
        report.push(
            "gevrey_g",
            format!("n={n}"),
            meas_g,
            f1 * m1.powi(n as i32) * factorial(n).powf(gamma),
        );
        let meas_h = t_samples
            .iter()
            .map(|&t| h.derivative(n, t).abs())
            .fold(0.0f64, f64::max);
        report.push(
            "gevrey_h",
            format!("n={n}"),
            meas_h,
            f2 * m2.powi(n as i32) * factorial(n).powf(gamma),
        );
    }
    report
}

/// Norm-gain estimates for the linearizing transform:
/// the forward gain ‖ṽ̄‖ ≤ α₁(‖ũ‖), the inverse gain under the feasibility
/// bound sup|ṽ̄| < c, and the empirical ratios between ‖ṽ‖ and ‖ṽ̄‖.
pub fn norm_lemma_check(
    u_tilde: &Field,
    u_ref: &Field,
    p: &Params,
    c: f64,
) -> Result<MarginReport> {
    let mut report = MarginReport::default();
    let h1_u = h1_norm(u_tilde)?;
    let vbar = hopf_cole_forward(u_tilde, p)?;
    let h1_vbar = h1_norm(&vbar)?;
    report.push(
        "norm_forward_gain",
        format!("h1_u={h1_u:.3}"),
        h1_vbar,
        alpha1(h1_u, p),
    );

    if sup_norm(&vbar) < c {
        let gain = p.epsilon() / (p.a().abs() * (1.0 - c));
        report.push("norm_inverse_gain", format!("c={c}"), h1_u, gain * h1_vbar);
    } else {
        // feasibility precondition fails: the estimate does not apply
        report.push(
            "norm_inverse_gain_skipped",
            format!("sup={:.3}", sup_norm(&vbar)),
            0.0,
            0.0,
        );
    }

    // empirical ratios between the weighted and unweighted error norms; the
    // constants are existential, so only finiteness and positivity are asserted
    let vt = error_transform(u_tilde, u_ref, p)?;
    let h1_vt = h1_norm(&vt)?;
    if h1_vbar > 1e-14 && h1_vt > 1e-14 {
        for (name, ratio) in [
            ("norm_weight_ratio_fwd", h1_vt / h1_vbar),
            ("norm_weight_ratio_inv", h1_vbar / h1_vt),
        ] {
            report.records.push(CheckRecord {
                check: name.to_string(),
                case: "ratio".into(),
                measured: ratio,
                bound: f64::INFINITY,
                margin: if ratio.is_finite() && ratio > 0.0 {
                    f64::INFINITY
                } else {
                    -1.0
                },
            });
        }
    }
    Ok(report)
}

/// Linearization residual of a simulated run: v = e^{−(ab/2ε)x}(e^{−(a/ε)u} − 1)
/// must satisfy the linear PDE v_t = ε v_xx − (a²b²/4ε)v up to the scheme's
/// own truncation level. Returns (max residual, truncation estimate).
pub fn linearization_residual(result: &SimResult, p: &Params) -> Result<(f64, f64)> {
    let n_rec = result.times.len();
    assert!(n_rec >= 5, "need at least five recorded snapshots");
    let v: Vec<Field> = result
        .u
        .iter()
        .map(|u| -> Result<Field> {
            Ok(spatial_weight(
                &hopf_cole_forward(u, p)?,
                p,
                Weight::Forward,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let h = result.grid.spacing();
    let n = result.grid.n();
    let dt_rec = result.times[1] - result.times[0];

    let mut max_res = 0.0f64;
    let mut max_vtt = 0.0f64;
    let mut max_vttt = 0.0f64;
    let mut max_v4x = 0.0f64;
    for m in 1..n_rec - 1 {
        for i in 1..n - 1 {
            let vt = (v[m + 1].get(i) - v[m - 1].get(i)) / (2.0 * dt_rec);
            let vxx = (v[m].get(i + 1) - 2.0 * v[m].get(i) + v[m].get(i - 1)) / (h * h);
            let res = vt - p.epsilon() * vxx + p.reaction_rate() * v[m].get(i);
            max_res = max_res.max(res.abs());
            let vtt = (v[m + 1].get(i) - 2.0 * v[m].get(i) + v[m - 1].get(i)) / (dt_rec * dt_rec);
            max_vtt = max_vtt.max(vtt.abs());
            if m >= 2 && m + 2 < n_rec {
                let vttt = (v[m + 2].get(i) - 2.0 * v[m + 1].get(i) + 2.0 * v[m - 1].get(i)
                    - v[m - 2].get(i))
                    / (2.0 * dt_rec * dt_rec * dt_rec);
                max_vttt = max_vttt.max(vttt.abs());
            }
            if i >= 2 && i + 2 < n {
                let v4 = (v[m].get(i + 2) - 4.0 * v[m].get(i + 1) + 6.0 * v[m].get(i)
                    - 4.0 * v[m].get(i - 1)
                    + v[m].get(i - 2))
                    / (h * h * h * h);
                max_v4x = max_v4x.max(v4.abs());
            }
        }
    }
    // backward-Euler-in-time, second-order-in-space truncation, plus the
    // sampling error of the centered time difference used for v_t
    let tau = 0.5 * result.dt * max_vtt
        + p.epsilon() * h * h / 12.0 * max_v4x
        + dt_rec * dt_rec / 6.0 * max_vttt;
    Ok((max_res, tau.max(1e-12)))
}

/// Deterministic smooth random field with the requested H¹ norm: a short
/// sine series with random coefficients, rescaled.
pub fn random_smooth_field(grid: Grid, rng: &mut impl Rng, h1_target: f64) -> Field {
    let coefs: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let raw = Field::from_fn(grid, |x| {
        coefs
            .iter()
            .enumerate()
            .map(|(j, c)| c * ((j + 1) as f64 * std::f64::consts::PI * x).sin())
            .sum()
    });
    let h1 = h1_norm(&raw).expect("finite");
    if h1 == 0.0 {
        return raw;
    }
    let scale = h1_target / h1;
    Field::new(grid, raw.values().iter().map(|v| v * scale).collect()).expect("same length")
}

/// Convenience: S₁-style quadratic functional of a field.
pub fn s1_functional(f: &Field) -> Result<f64> {
    let fx = derivative(f);
    let h = f.grid().spacing();
    let sq: Vec<f64> = f.values().iter().map(|v| v * v).collect();
    let sqx: Vec<f64> = fx.values().iter().map(|v| v * v).collect();
    Ok(0.5 * integrate_slice(&sq, h) + 0.5 * integrate_slice(&sqx, h))
}
