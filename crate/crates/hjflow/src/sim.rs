//! Method-of-lines integration of the viscous HJ plant under boundary
//! feedback, with optional synchronous observer co-simulation, plus the
//! traffic-density conversions.
//!
//! Default scheme is semi-implicit: diffusion advanced by backward Euler
//! through a tridiagonal solve, the quadratic gradient term frozen at the
//! current step. The explicit scheme is kept for refinement studies and is
//! guarded by the CFL rule dt ≤ 0.4 h²/ε.

use std::io::Write;

use crate::control::{self, BoundaryInput};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::kernels::{build_kernel_table, KernelTable};
use crate::observer::{boundary_injections, observer_rhs, ObserverState};
use crate::params::Params;
use crate::quad::{derivative, h1_norm, integrate, sup_norm};
use crate::trajgen::{self, ReferencePlan, ReferenceProfile};
use crate::transforms::error_transform;
use crate::volterra::IntegralOperator;

/// Divergence threshold on the sup norm of the state.
pub const DIVERGENCE_SUP: f64 = 1e6;

/// CFL safety factor for the explicit scheme.
pub const CFL_FACTOR: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ExplicitEuler,
    SemiImplicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Controller {
    FullState,
    OutputFeedback,
    Static,
    Unilateral,
    FeedforwardOnly,
}

/// Reference family driving the run.
#[derive(Clone)]
pub enum Reference {
    Sine { d: f64, x0: f64 },
    Traffic,
    Custom(ReferencePlan),
}

impl Reference {
    pub fn plan(&self) -> Result<ReferencePlan> {
        match self {
            Reference::Sine { d, x0 } => trajgen::sine_plan(*d, *x0, 30, 1e-12),
            Reference::Traffic => trajgen::traffic_plan(30, 1e-12),
            Reference::Custom(plan) => Ok(plan.clone()),
        }
    }
}

/// Initial plant state.
#[derive(Clone)]
pub enum InitialCondition {
    /// u₀ = uʳ(·, t₀): start on the trajectory.
    Reference,
    /// u₀ = uʳ(·, t₀) + amplitude·sin(πx).
    ReferencePlusSine {
        amplitude: f64,
    },
    Custom(Field),
}

#[derive(Clone)]
pub struct SimConfig {
    pub params: Params,
    pub grid: Grid,
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub controller: Controller,
    pub reference: Reference,
    pub initial: InitialCondition,
    pub record_every: usize,
    /// Observer initial estimate; `None` means v̂₀ = 0.
    pub v_hat0: Option<Field>,
}

impl SimConfig {
    /// The traffic tracking scenario with the bilateral full-state law.
    pub fn traffic_default() -> Self {
        Self {
            params: Params::traffic(),
            grid: Grid::new(201).expect("valid"),
            t0: 0.0,
            t_end: 8.0,
            dt: 1e-3,
            scheme: Scheme::SemiImplicit,
            controller: Controller::FullState,
            reference: Reference::Traffic,
            initial: InitialCondition::ReferencePlusSine { amplitude: 0.1 },
            record_every: 10,
            v_hat0: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dt.is_nan() || self.dt <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "dt must be > 0, got {}",
                self.dt
            )));
        }
        if self.t_end <= self.t0 {
            return Err(Error::InvalidConfig(format!(
                "t_end {} must exceed t0 {}",
                self.t_end, self.t0
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfig("record_every must be >= 1".into()));
        }
        if self.scheme == Scheme::ExplicitEuler {
            let h = self.grid.spacing();
            let limit = CFL_FACTOR * h * h / self.params.epsilon();
            if self.dt > limit {
                return Err(Error::CflViolation { dt: self.dt, limit });
            }
        }
        if let InitialCondition::Custom(f) = &self.initial {
            if f.grid() != self.grid {
                return Err(Error::GridMismatch(f.grid().n(), self.grid.n()));
            }
        }
        if let Some(v) = &self.v_hat0 {
            if v.grid() != self.grid {
                return Err(Error::GridMismatch(v.grid().n(), self.grid.n()));
            }
        }
        Ok(())
    }
}

/// Time-indexed record of a closed-loop run.
#[derive(Debug, Clone)]
pub struct SimResult {
    pub params: Params,
    pub grid: Grid,
    pub dt: f64,
    pub times: Vec<f64>,
    pub u: Vec<Field>,
    pub u_ref: Vec<Field>,
    pub v_hat: Option<Vec<Field>>,
    pub u0_inputs: Vec<f64>,
    pub u1_inputs: Vec<f64>,
    /// ‖ũ‖_{H¹} at the recorded instants.
    pub h1_u_tilde: Vec<f64>,
    /// ‖w‖_{H¹} of the target-state diagnostic.
    pub h1_w: Vec<f64>,
    /// S₁ = ½∫w² + ½∫w_x².
    pub s1_w: Vec<f64>,
    /// ‖ṽ − v̂‖_{H¹}, present when the observer runs.
    pub h1_e: Option<Vec<f64>>,
    /// max |U₀| over every step of the run (not just recorded ones).
    pub max_abs_u0: f64,
    pub max_abs_u1: f64,
}

/// Right-hand side ε u_xx − a u_x (b + u_x) with Neumann data imposed via
/// second-order ghost nodes (u₋₁ = u₁ − 2h·U₀ and symmetrically at x = 1).
pub fn hj_rhs(u: &Field, inputs: &BoundaryInput, p: &Params) -> Result<Field> {
    if let Some(node) = u.first_non_finite() {
        return Err(Error::NonFinite { node });
    }
    let n = u.grid().n();
    let h = u.grid().spacing();
    let v = u.values();
    let (a, b, eps) = (p.a(), p.b(), p.epsilon());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (ux, uxx) = if i == 0 {
            (
                inputs.u0,
                (2.0 * v[1] - 2.0 * v[0] - 2.0 * h * inputs.u0) / (h * h),
            )
        } else if i == n - 1 {
            (
                inputs.u1,
                (2.0 * v[n - 2] - 2.0 * v[n - 1] + 2.0 * h * inputs.u1) / (h * h),
            )
        } else {
            (
                (v[i + 1] - v[i - 1]) / (2.0 * h),
                (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h),
            )
        };
        out.push(eps * uxx - a * ux * (b + ux));
    }
    Field::new(u.grid(), out)
}

/// Thomas algorithm for a tridiagonal system; `lower[0]` and
/// `upper[n-1]` are ignored.
fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i < n - 1 { upper[i] / m } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

fn step_plant(u: &Field, inputs: &BoundaryInput, cfg: &SimConfig) -> Result<Field> {
    match cfg.scheme {
        Scheme::ExplicitEuler => {
            let rhs = hj_rhs(u, inputs, &cfg.params)?;
            u.zip_with(&rhs, |ui, ri| ui + cfg.dt * ri)
        }
        Scheme::SemiImplicit => {
            let n = cfg.grid.n();
            let h = cfg.grid.spacing();
            let (a, b, eps, dt) = (cfg.params.a(), cfg.params.b(), cfg.params.epsilon(), cfg.dt);
            let r = eps * dt / (h * h);
            let mut lower = vec![-r; n];
            let mut upper = vec![-r; n];
            let diag = vec![1.0 + 2.0 * r; n];
            upper[0] = -2.0 * r;
            lower[n - 1] = -2.0 * r;
            let v = u.values();
            let mut rhs = vec![0.0; n];
            for i in 0..n {
                let ux = if i == 0 {
                    inputs.u0
                } else if i == n - 1 {
                    inputs.u1
                } else {
                    (v[i + 1] - v[i - 1]) / (2.0 * h)
                };
                rhs[i] = v[i] - dt * a * ux * (b + ux);
            }
            rhs[0] -= dt * 2.0 * eps * inputs.u0 / h;
            rhs[n - 1] += dt * 2.0 * eps * inputs.u1 / h;
            Field::new(cfg.grid, solve_tridiagonal(&lower, &diag, &upper, &rhs))
        }
    }
}

/// One time step of the plant under held boundary inputs.
pub fn step(u: &Field, inputs: &BoundaryInput, cfg: &SimConfig) -> Result<Field> {
    let next = step_plant(u, inputs, cfg)?;
    if let Some(node) = next.first_non_finite() {
        return Err(Error::NonFinite { node });
    }
    Ok(next)
}

fn step_observer(
    state: &ObserverState,
    injections: (f64, f64),
    v_inputs: (f64, f64),
    cfg: &SimConfig,
) -> Result<Field> {
    let p = &cfg.params;
    match cfg.scheme {
        Scheme::ExplicitEuler => {
            let rhs = observer_rhs(state, injections, v_inputs, p)?;
            state.v_hat.zip_with(&rhs, |vi, ri| vi + cfg.dt * ri)
        }
        Scheme::SemiImplicit => {
            let n = cfg.grid.n();
            let h = cfg.grid.spacing();
            let (eps, dt) = (p.epsilon(), cfg.dt);
            let r = eps * dt / (h * h);
            let mut lower = vec![-r; n];
            let mut upper = vec![-r; n];
            let diag = vec![1.0 + 2.0 * r; n];
            upper[0] = -2.0 * r;
            lower[n - 1] = -2.0 * r;
            let beta = p.reaction_rate();
            let (inj0, inj1) = injections;
            let g0 = v_inputs.0 + state.p00 * inj0;
            let g1 = v_inputs.1 + state.p11 * inj1;
            let v = state.v_hat.values();
            let mut rhs = vec![0.0; n];
            for i in 0..n {
                rhs[i] =
                    v[i] + dt * (-beta * v[i] + state.p2.get(i) * inj0 + state.p1.get(i) * inj1);
            }
            rhs[0] -= dt * 2.0 * eps * g0 / h;
            rhs[n - 1] += dt * 2.0 * eps * g1 / h;
            Field::new(cfg.grid, solve_tridiagonal(&lower, &diag, &upper, &rhs))
        }
    }
}

/// ṽ(0), ṽ(1) reconstructed from measured boundary traces.
fn measured_v_tilde_traces(u: &Field, prof: &ReferenceProfile, p: &Params) -> (f64, f64) {
    let r = p.a_over_eps();
    let w = p.ab_over_2eps();
    let vt0 = ((-r * (u.first() - prof.ur.first())).exp() - 1.0) * (-r * prof.ur.first()).exp();
    let vt1 = ((-r * (u.last() - prof.ur.last())).exp() - 1.0) * (-w - r * prof.ur.last()).exp();
    (vt0, vt1)
}

/// Backstepping boundary values for the observer BC in output-feedback mode:
/// Ṽ₀ = k(0,0)·ṽ(0) − ∫ k_x(0,ξ)v̂ dξ, Ṽ₁ = k(1,1)·ṽ(1) + ∫ k_x(1,ξ)v̂ dξ.
fn observer_v_inputs(
    u: &Field,
    prof: &ReferenceProfile,
    v_hat: &Field,
    table: &KernelTable,
    p: &Params,
) -> Result<(f64, f64)> {
    let (vt0, vt1) = measured_v_tilde_traces(u, prof, p);
    let w0 = Field::new(
        table.grid,
        table
            .k_row0
            .iter()
            .zip(v_hat.values())
            .map(|(k, v)| k * v)
            .collect(),
    )?;
    let w1 = Field::new(
        table.grid,
        table
            .k_row1
            .iter()
            .zip(v_hat.values())
            .map(|(k, v)| k * v)
            .collect(),
    )?;
    Ok((
        table.k_diag0 * vt0 - integrate(&w0)?,
        table.k_diag1 * vt1 + integrate(&w1)?,
    ))
}

fn initial_state(cfg: &SimConfig, prof0: &ReferenceProfile) -> Field {
    match &cfg.initial {
        InitialCondition::Reference => prof0.ur.clone(),
        InitialCondition::ReferencePlusSine { amplitude } => {
            let amp = *amplitude;
            prof0
                .ur
                .map_with_x(move |x, v| v + amp * (std::f64::consts::PI * x).sin())
        }
        InitialCondition::Custom(f) => f.clone(),
    }
}

/// Advance plant (and observer, when configured) over [t0, t_end], computing
/// the boundary inputs from the configured controller once per step.
pub fn run_closed_loop(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let p = cfg.params;
    let plan = cfg.reference.plan()?;
    let table = build_kernel_table(cfg.grid, &p);
    let w_op = IntegralOperator::control_direct(cfg.grid, p.c1(), p.epsilon());

    let reference_at = |t: f64| -> Result<ReferenceProfile> {
        let (vr, vr_x) = trajgen::series_reference(&plan, &p, t, cfg.grid)?;
        trajgen::reference_profile(&vr, &vr_x, &p)
    };

    let prof0 = reference_at(cfg.t0)?;
    let mut u = initial_state(cfg, &prof0);
    let mut observer = match cfg.controller {
        Controller::OutputFeedback => Some(match &cfg.v_hat0 {
            Some(v0) => ObserverState::new(v0.clone(), &table)?,
            None => ObserverState::zeros(&table),
        }),
        _ => None,
    };

    let n_steps = ((cfg.t_end - cfg.t0) / cfg.dt).round() as usize;
    let mut result = SimResult {
        params: p,
        grid: cfg.grid,
        dt: cfg.dt,
        times: Vec::new(),
        u: Vec::new(),
        u_ref: Vec::new(),
        v_hat: observer.as_ref().map(|_| Vec::new()),
        u0_inputs: Vec::new(),
        u1_inputs: Vec::new(),
        h1_u_tilde: Vec::new(),
        h1_w: Vec::new(),
        s1_w: Vec::new(),
        h1_e: observer.as_ref().map(|_| Vec::new()),
        max_abs_u0: 0.0,
        max_abs_u1: 0.0,
    };

    let record = |t: f64,
                  u: &Field,
                  prof: &ReferenceProfile,
                  inputs: &BoundaryInput,
                  observer: Option<&ObserverState>,
                  result: &mut SimResult|
     -> Result<()> {
        let ut = u.zip_with(&prof.ur, |a, b| a - b)?;
        let vt = error_transform(&ut, &prof.ur, &p).map_err(|e| Error::FeasibilityExit {
            t,
            detail: e.to_string(),
        })?;
        let w = w_op.apply(&vt);
        let wx = derivative(&w);
        let s1 = 0.5 * integrate(&w.zip_with(&w, |a, b| a * b)?)?
            + 0.5 * integrate(&wx.zip_with(&wx, |a, b| a * b)?)?;
        result.times.push(t);
        result.u.push(u.clone());
        result.u_ref.push(prof.ur.clone());
        result.u0_inputs.push(inputs.u0);
        result.u1_inputs.push(inputs.u1);
        result.h1_u_tilde.push(h1_norm(&ut)?);
        result.h1_w.push(h1_norm(&w)?);
        result.s1_w.push(s1);
        if let Some(obs) = observer {
            let e = vt.zip_with(&obs.v_hat, |a, b| a - b)?;
            result
                .h1_e
                .as_mut()
                .expect("observer active")
                .push(h1_norm(&e)?);
            result
                .v_hat
                .as_mut()
                .expect("observer active")
                .push(obs.v_hat.clone());
        }
        Ok(())
    };

    let mut t = cfg.t0;
    for step_idx in 0..=n_steps {
        let prof = if step_idx == 0 {
            prof0.clone()
        } else {
            reference_at(t)?
        };

        let inputs = match cfg.controller {
            Controller::FullState => {
                control::fullstate_bilateral(&u, &prof.ur, prof.u0r, prof.u1r, &table, &p)?
            }
            Controller::OutputFeedback => {
                let obs = observer.as_ref().expect("observer active");
                control::output_feedback(
                    u.first(),
                    u.last(),
                    &obs.v_hat,
                    &prof.ur,
                    prof.u0r,
                    prof.u1r,
                    &table,
                    &p,
                )?
            }
            Controller::Static => control::static_collocated(
                u.first() - prof.ur.first(),
                u.last() - prof.ur.last(),
                prof.u0r,
                prof.u1r,
                &p,
            )?,
            Controller::Unilateral => {
                control::unilateral_baseline(&u, &prof.ur, prof.u0r, prof.u1r, &p)?
            }
            Controller::FeedforwardOnly => BoundaryInput {
                u0: prof.u0r,
                u1: prof.u1r,
            },
        };
        result.max_abs_u0 = result.max_abs_u0.max(inputs.u0.abs());
        result.max_abs_u1 = result.max_abs_u1.max(inputs.u1.abs());

        if step_idx.is_multiple_of(cfg.record_every) || step_idx == n_steps {
            record(t, &u, &prof, &inputs, observer.as_ref(), &mut result)?;
        }
        if step_idx == n_steps {
            break;
        }

        if let Some(obs) = observer.as_mut() {
            let (inj0, inj1) = boundary_injections(
                u.first(),
                u.last(),
                prof.ur.first(),
                prof.ur.last(),
                &obs.v_hat,
                &p,
            )?;
            let v_inputs = observer_v_inputs(&u, &prof, &obs.v_hat, &table, &p)?;
            obs.v_hat = step_observer(obs, (inj0, inj1), v_inputs, cfg)?;
        }
        u = step(&u, &inputs, cfg).map_err(|e| match e {
            Error::NonFinite { .. } => Error::Divergence {
                t,
                sup: f64::INFINITY,
            },
            other => other,
        })?;
        let sup = sup_norm(&u);
        if sup > DIVERGENCE_SUP {
            return Err(Error::Divergence { t, sup });
        }
        t = cfg.t0 + (step_idx as f64 + 1.0) * cfg.dt;
    }

    Ok(result)
}

/// Moskowitz lift: u(x) = ∫ₓ¹ ρ(y) dy + outflow_integral, by cumulative
/// trapezoid quadrature from the right boundary.
pub fn moskowitz_from_density(rho: &Field, outflow_integral: f64) -> Field {
    let n = rho.grid().n();
    let h = rho.grid().spacing();
    let mut vals = vec![0.0; n];
    vals[n - 1] = outflow_integral;
    for i in (0..n - 1).rev() {
        vals[i] = vals[i + 1] + 0.5 * h * (rho.get(i) + rho.get(i + 1));
    }
    Field::new(rho.grid(), vals).expect("same length")
}

/// ρ = −u_x by central differences (one-sided at the boundaries).
pub fn density_from_moskowitz(u: &Field) -> Field {
    let d = derivative(u);
    d.map_with_x(|_, v| -v)
}

/// Traffic flux Q(ρ, ρ_x) = ρ·a(b − ρ) − ε ρ_x.
pub fn flux(rho: f64, rho_x: f64, p: &Params) -> f64 {
    rho * p.a() * (p.b() - rho) - p.epsilon() * rho_x
}

/// Scalar series CSV: one row per recorded instant.
pub fn write_scalar_csv<W: Write>(result: &SimResult, out: &mut W) -> std::io::Result<()> {
    let has_e = result.h1_e.is_some();
    if has_e {
        writeln!(out, "t,U0,U1,u_at_1,ur_at_1,h1_err,h1_w,s1_w,h1_e")?;
    } else {
        writeln!(out, "t,U0,U1,u_at_1,ur_at_1,h1_err,h1_w,s1_w")?;
    }
    for i in 0..result.times.len() {
        write!(
            out,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            result.times[i],
            result.u0_inputs[i],
            result.u1_inputs[i],
            result.u[i].last(),
            result.u_ref[i].last(),
            result.h1_u_tilde[i],
            result.h1_w[i],
            result.s1_w[i],
        )?;
        if let Some(e) = &result.h1_e {
            write!(out, ",{:.12e}", e[i])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Long-format snapshot CSV: one row per (t, x) pair.
pub fn write_fields_csv<W: Write>(result: &SimResult, out: &mut W) -> std::io::Result<()> {
    let has_vhat = result.v_hat.is_some();
    if has_vhat {
        writeln!(out, "t,x,u,rho,v_hat")?;
    } else {
        writeln!(out, "t,x,u,rho")?;
    }
    for (i, t) in result.times.iter().enumerate() {
        let rho = density_from_moskowitz(&result.u[i]);
        for j in 0..result.grid.n() {
            let x = result.grid.node(j);
            write!(
                out,
                "{t:.12e},{x:.12e},{:.12e},{:.12e}",
                result.u[i].get(j),
                rho.get(j)
            )?;
            if let Some(vh) = &result.v_hat {
                write!(out, ",{:.12e}", vh[i].get(j))?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}
