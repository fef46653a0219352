//! Trajectory generation for the transformed linear PDE and the feedforward
//! boundary laws for the original plant.
//!
//! The reference vʳ is a power series in (x − x₀) driven by time derivatives
//! of the lifted outputs y₁ᵥ, y₂ᵥ; truncation is controlled by a fixed cap
//! plus a term-magnitude stopping rule. Two closed-form families ship with
//! the crate: the sine example (a = −1, b = 0) and the traffic ramp.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::params::Params;
use crate::signal::{
    binomial, ConstSignal, ExpSignal, LinComboSignal, ProductSignal, RampSignal, Signal, SineSignal,
};
use crate::transforms::{EXP_GUARD, FEASIBILITY_MARGIN};

/// Reference outputs y₁ʳ, y₂ʳ imposed at x₀, plus series truncation policy.
#[derive(Clone)]
pub struct ReferencePlan {
    pub x0: f64,
    pub y1: Arc<dyn Signal>,
    pub y2: Arc<dyn Signal>,
    pub k_max: usize,
    pub term_tol: f64,
}

impl ReferencePlan {
    pub fn new(
        x0: f64,
        y1: Arc<dyn Signal>,
        y2: Arc<dyn Signal>,
        k_max: usize,
        term_tol: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&x0) {
            return Err(Error::InvalidParams(format!(
                "x0 must lie in [0,1], got {x0}"
            )));
        }
        if k_max < 1 {
            return Err(Error::InvalidParams("k_max must be >= 1".into()));
        }
        if term_tol.is_nan() || term_tol <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "term_tol must be > 0, got {term_tol}"
            )));
        }
        Ok(Self {
            x0,
            y1,
            y2,
            k_max,
            term_tol,
        })
    }
}

/// y₁ʳ = 0, y₂ʳ = d·sin(t), output location x₀ (Example 1 family).
pub fn sine_plan(d: f64, x0: f64, k_max: usize, term_tol: f64) -> Result<ReferencePlan> {
    ReferencePlan::new(x0, gevrey_const(0.0), gevrey_sine(d), k_max, term_tol)
}

/// y₁ʳ = t/4, y₂ʳ = −1/2 at x₀ = 1: outlet-flow regulation to capacity flow.
pub fn traffic_plan(k_max: usize, term_tol: f64) -> Result<ReferencePlan> {
    ReferencePlan::new(1.0, gevrey_ramp(0.25), gevrey_const(-0.5), k_max, term_tol)
}

pub fn gevrey_sine(d: f64) -> Arc<dyn Signal> {
    Arc::new(SineSignal { amplitude: d })
}

pub fn gevrey_ramp(slope: f64) -> Arc<dyn Signal> {
    Arc::new(RampSignal { slope })
}

pub fn gevrey_const(c: f64) -> Arc<dyn Signal> {
    Arc::new(ConstSignal { value: c })
}

/// Pointwise lift of the outputs to the transformed variable:
/// y₁ᵥ = e^{−(ab/2ε)x₀}(e^{−(a/ε)y₁} − 1),
/// y₂ᵥ = e^{−(ab/2ε)x₀}(−(a/ε)e^{−(a/ε)y₁}y₂ − (ab/2ε)(e^{−(a/ε)y₁} − 1)).
pub fn output_lift(y1: f64, y2: f64, p: &Params, x0: f64) -> Result<(f64, f64)> {
    let r = p.a_over_eps();
    let w = p.ab_over_2eps();
    let exponent = -r * y1;
    if !exponent.is_finite() || exponent.abs() > EXP_GUARD {
        return Err(Error::Overflow { node: 0, exponent });
    }
    let e = exponent.exp();
    let c = (-w * x0).exp();
    let y1v = c * (e - 1.0);
    let y2v = c * (-r * e * y2 - w * (e - 1.0));
    Ok((y1v, y2v))
}

/// Lifted outputs as signals with exact derivatives of every order.
pub fn lifted_signals(plan: &ReferencePlan, p: &Params) -> (Arc<dyn Signal>, Arc<dyn Signal>) {
    let r = p.a_over_eps();
    let w = p.ab_over_2eps();
    let c = (-w * plan.x0).exp();
    let e: Arc<dyn Signal> = Arc::new(ExpSignal::new(plan.y1.clone(), -r));
    let y1v = LinComboSignal {
        terms: vec![(c, e.clone())],
        constant: -c,
    };
    let prod: Arc<dyn Signal> = Arc::new(ProductSignal {
        left: e.clone(),
        right: plan.y2.clone(),
    });
    let y2v = LinComboSignal {
        terms: vec![(-c * r, prod), (-c * w, e)],
        constant: c * w,
    };
    (Arc::new(y1v), Arc::new(y2v))
}

/// Truncated series for vʳ(·, t) and its spatial derivative vʳ_x(·, t).
///
/// Terms are added until two consecutive contributions' sups over the grid
/// fall below `term_tol` (a single small term proves nothing for signals
/// whose derivatives vanish periodically, e.g. sin at t = 0); reaching
/// `k_max` first is a truncation failure.
pub fn series_reference(
    plan: &ReferencePlan,
    p: &Params,
    t: f64,
    grid: Grid,
) -> Result<(Field, Field)> {
    let (y1v, y2v) = lifted_signals(plan, p);
    series_from_lifts(plan, y1v.as_ref(), y2v.as_ref(), p, t, grid)
}

fn series_from_lifts(
    plan: &ReferencePlan,
    y1v: &dyn Signal,
    y2v: &dyn Signal,
    p: &Params,
    t: f64,
    grid: Grid,
) -> Result<(Field, Field)> {
    let n = grid.n();
    let eps = p.epsilon();
    let beta = p.reaction_rate();
    let dx: Vec<f64> = grid.nodes().map(|x| x - plan.x0).collect();

    let mut vr = vec![0.0; n];
    let mut vr_x = vec![0.0; n];
    // coefficient ladders: even (x-x0)^{2k}/((2k)! eps^k), odd /(2k+1)!,
    // d_even (x-x0)^{2k-1}/((2k-1)! eps^k)
    let mut even: Vec<f64> = vec![1.0; n];
    let mut odd: Vec<f64> = dx.clone();
    let mut d_even: Vec<f64> = vec![0.0; n];
    let mut d1 = Vec::new(); // derivatives of y1v at t
    let mut d2 = Vec::new();
    let mut prev_term_sup = f64::INFINITY;

    for k in 0..=plan.k_max {
        d1.push(y1v.derivative(k, t));
        d2.push(y2v.derivative(k, t));
        let inner1: f64 = (0..=k)
            .map(|m| binomial(k, m) * beta.powi((k - m) as i32) * d1[m])
            .sum();
        let inner2: f64 = (0..=k)
            .map(|m| binomial(k, m) * beta.powi((k - m) as i32) * d2[m])
            .sum();

        let mut term_sup = 0.0f64;
        for i in 0..n {
            let contrib = even[i] * inner1 + odd[i] * inner2;
            vr[i] += contrib;
            vr_x[i] += d_even[i] * inner1 + even[i] * inner2;
            term_sup = term_sup.max((even[i] * inner1).abs() + (odd[i] * inner2).abs());
        }
        if term_sup < plan.term_tol && prev_term_sup < plan.term_tol {
            let vr = Field::new(grid, vr)?;
            let vr_x = Field::new(grid, vr_x)?;
            return Ok((vr, vr_x));
        }
        prev_term_sup = term_sup;
        // advance ladders to order k+1
        let kk = (k + 1) as f64;
        for i in 0..n {
            d_even[i] = if k == 0 {
                dx[i] / eps
            } else {
                d_even[i] * dx[i] * dx[i] / (eps * (2.0 * kk - 2.0) * (2.0 * kk - 1.0))
            };
            even[i] *= dx[i] * dx[i] / (eps * (2.0 * kk - 1.0) * (2.0 * kk));
            odd[i] *= dx[i] * dx[i] / (eps * (2.0 * kk) * (2.0 * kk + 1.0));
        }
    }

    // never met the stopping rule: report the size of the k_max-th term
    let inner1: f64 = (0..=plan.k_max)
        .map(|m| binomial(plan.k_max, m) * beta.powi((plan.k_max - m) as i32) * d1[m])
        .sum();
    let inner2: f64 = (0..=plan.k_max)
        .map(|m| binomial(plan.k_max, m) * beta.powi((plan.k_max - m) as i32) * d2[m])
        .sum();
    let last = (0..n)
        .map(|i| (even[i] * inner1).abs() + (odd[i] * inner2).abs())
        .fold(0.0f64, f64::max);
    Err(Error::Truncation {
        last_term: last,
        tol: plan.term_tol,
        k: plan.k_max,
    })
}

/// Reference in the physical variable plus both feedforward inputs.
#[derive(Debug, Clone)]
pub struct ReferenceProfile {
    /// uʳ(·, t) on the grid.
    pub ur: Field,
    /// u_xʳ(·, t) on the grid.
    pub urx: Field,
    /// Feedforward Neumann value at x = 0 (equals urx at the first node).
    pub u0r: f64,
    /// Feedforward Neumann value at x = 1.
    pub u1r: f64,
}

/// Map (vʳ, vʳ_x) back to uʳ = −(ε/a)·ln(e^{(ab/2ε)x}vʳ + 1) and the
/// feedforward laws. Fails when the logarithm argument leaves its domain.
pub fn reference_profile(vr: &Field, vr_x: &Field, p: &Params) -> Result<ReferenceProfile> {
    vr.check_same_grid(vr_x)?;
    let grid = vr.grid();
    let w = p.ab_over_2eps();
    let scale = -p.epsilon() / p.a();
    let mut ur = Vec::with_capacity(grid.n());
    let mut urx = Vec::with_capacity(grid.n());
    for i in 0..grid.n() {
        let x = grid.node(i);
        let weight = (w * x).exp();
        let arg = weight * vr.get(i) + 1.0;
        if arg.is_nan() || arg <= FEASIBILITY_MARGIN {
            return Err(Error::ReferenceInfeasible(format!(
                "log argument {arg:.3e} at node {i} (x = {x})"
            )));
        }
        ur.push(scale * arg.ln());
        urx.push(scale * weight * (vr_x.get(i) + w * vr.get(i)) / arg);
    }
    let u0r = urx[0];
    let u1r = *urx.last().expect("n >= 3");
    Ok(ReferenceProfile {
        ur: Field::new(grid, ur)?,
        urx: Field::new(grid, urx)?,
        u0r,
        u1r,
    })
}

/// Closed-form vʳ for the sine example (a = −1, b = 0):
/// (d/2√ε)·e^{(x−x₀)/√(2ε)}·sin(t + (x−x₀)/√(2ε) − π/4) minus the mirrored
/// term in (x₀ − x).
pub fn sine_reference_closed_form(d: f64, eps: f64, x0: f64, t: f64, grid: Grid) -> Field {
    let s = (2.0 * eps).sqrt();
    let amp = d / (2.0 * eps.sqrt());
    let quarter_pi = std::f64::consts::FRAC_PI_4;
    Field::from_fn(grid, |x| {
        let th = (x - x0) / s;
        amp * (th.exp() * (t + th - quarter_pi).sin() - (-th).exp() * (t - th - quarter_pi).sin())
    })
}

/// Measured margin of the smallness condition: e^{−|ab/2ε|} − sup |vʳ| over
/// the grid and the given time samples. Positive means the condition holds
/// with room to spare; the traffic ramp reports a negative margin by design.
pub fn smallness_margin(
    plan: &ReferencePlan,
    p: &Params,
    grid: Grid,
    t_samples: &[f64],
) -> Result<f64> {
    let mut sup = 0.0f64;
    for &t in t_samples {
        let (vr, _) = series_reference(plan, p, t, grid)?;
        sup = sup.max(crate::quad::sup_norm(&vr));
    }
    Ok((-p.ab_over_2eps().abs()).exp() - sup)
}
