//! Feedback-linearizing transformations of Hopf–Cole type.
//!
//! The plant state u maps to v̄ = e^{−(a/ε)u} − 1, which turns the quadratic
//! HJ nonlinearity into a linear diffusion-advection PDE; the spatial weight
//! e^{−(ab/2ε)x} then removes the advection term. The same pair, applied to
//! the tracking error against a reference uʳ, yields the ṽ variable the
//! backstepping designs act on. All maps are pointwise on the shared grid.

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::params::Params;

/// Inverse maps reject when the logarithm argument falls below this margin
/// rather than exactly 0, keeping downstream norms finite under roundoff.
pub const FEASIBILITY_MARGIN: f64 = 1e-8;

/// Largest |exponent| fed to `exp`; beyond this the transform overflows f64.
pub const EXP_GUARD: f64 = 700.0;

fn checked_exp(arg: f64, node: usize) -> Result<f64> {
    if !arg.is_finite() || arg.abs() > EXP_GUARD {
        return Err(Error::Overflow {
            node,
            exponent: arg,
        });
    }
    Ok(arg.exp())
}

/// v̄(x) = e^{−(a/ε)u(x)} − 1.
pub fn hopf_cole_forward(u: &Field, p: &Params) -> Result<Field> {
    let r = p.a_over_eps();
    let mut vals = Vec::with_capacity(u.grid().n());
    for (i, &ui) in u.values().iter().enumerate() {
        vals.push(checked_exp(-r * ui, i)? - 1.0);
    }
    Field::new(u.grid(), vals)
}

/// ũ(x) = −(ε/a)·ln(v̄(x) + 1); requires v̄ > −1 at every node.
pub fn hopf_cole_inverse(vbar: &Field, p: &Params) -> Result<Field> {
    let r = p.a_over_eps();
    let mut vals = Vec::with_capacity(vbar.grid().n());
    for (i, &vi) in vbar.values().iter().enumerate() {
        let arg = vi + 1.0;
        if arg.is_nan() || arg <= FEASIBILITY_MARGIN {
            return Err(Error::Feasibility { node: i, value: vi });
        }
        vals.push(-arg.ln() / r);
    }
    Field::new(vbar.grid(), vals)
}

/// Direction of the spatial weight e^{∓(ab/2ε)x}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    /// Multiply by e^{−(ab/2ε)x} (v̄ → v).
    Forward,
    /// Multiply by e^{+(ab/2ε)x} (v → v̄).
    Inverse,
}

/// Apply the spatial weight to a field.
pub fn spatial_weight(f: &Field, p: &Params, dir: Weight) -> Field {
    let rate = match dir {
        Weight::Forward => -p.ab_over_2eps(),
        Weight::Inverse => p.ab_over_2eps(),
    };
    f.map_with_x(|x, v| v * (rate * x).exp())
}

/// Tracking-error transform ṽ = (e^{−(a/ε)ũ} − 1)·e^{−(ab/2ε)x − (a/ε)uʳ}.
pub fn error_transform(u_tilde: &Field, u_ref: &Field, p: &Params) -> Result<Field> {
    u_tilde.check_same_grid(u_ref)?;
    let r = p.a_over_eps();
    let w = p.ab_over_2eps();
    let grid = u_tilde.grid();
    let mut vals = Vec::with_capacity(grid.n());
    for i in 0..grid.n() {
        let x = grid.node(i);
        let core = checked_exp(-r * u_tilde.get(i), i)? - 1.0;
        let weight = checked_exp(-w * x - r * u_ref.get(i), i)?;
        vals.push(core * weight);
    }
    Field::new(grid, vals)
}

/// Inverse of [`error_transform`]:
/// ũ = −(ε/a)·ln(ṽ·e^{(ab/2ε)x + (a/ε)uʳ} + 1).
pub fn error_inverse(v_tilde: &Field, u_ref: &Field, p: &Params) -> Result<Field> {
    v_tilde.check_same_grid(u_ref)?;
    let r = p.a_over_eps();
    let w = p.ab_over_2eps();
    let grid = v_tilde.grid();
    let mut vals = Vec::with_capacity(grid.n());
    for i in 0..grid.n() {
        let x = grid.node(i);
        let weight = checked_exp(w * x + r * u_ref.get(i), i)?;
        let arg = v_tilde.get(i) * weight + 1.0;
        if arg.is_nan() || arg <= FEASIBILITY_MARGIN {
            return Err(Error::Feasibility {
                node: i,
                value: arg - 1.0,
            });
        }
        vals.push(-arg.ln() / r);
    }
    Field::new(grid, vals)
}

/// The explicit class-K∞ gain of the forward transform:
/// α₁(s) = â(2s) + (|a|/ε)·e^{2|a|s/ε}·s with â(s) = (|a|s/ε)·e^{|a|s/ε}.
pub fn alpha1(s: f64, p: &Params) -> f64 {
    let r = p.a().abs() / p.epsilon();
    let a_hat = |q: f64| r * q * (r * q).exp();
    a_hat(2.0 * s) + r * (2.0 * r * s).exp() * s
}
