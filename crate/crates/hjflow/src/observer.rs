//! Bilateral nonlinear observer for the transformed tracking error.
//!
//! A copy of the linear target dynamics plus output injection from both
//! boundaries. The injected quantities compare the measured boundary traces,
//! pushed through the linearizing transform, against the estimate.

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::kernels::KernelTable;
use crate::params::Params;
use crate::transforms::EXP_GUARD;

/// Observer state: the estimate v̂ of the transformed tracking error, plus
/// the gain slice of the kernel table it runs with.
#[derive(Debug, Clone)]
pub struct ObserverState {
    pub v_hat: Field,
    pub p1: Field,
    pub p2: Field,
    pub p00: f64,
    pub p11: f64,
}

impl ObserverState {
    /// Start from a given estimate (the uninformed default is zeros).
    pub fn new(v_hat: Field, table: &KernelTable) -> Result<Self> {
        if v_hat.grid() != table.grid {
            return Err(Error::GridMismatch(v_hat.grid().n(), table.grid.n()));
        }
        Ok(Self {
            v_hat,
            p1: table.p1.clone(),
            p2: table.p2.clone(),
            p00: table.p00,
            p11: table.p11,
        })
    }

    pub fn zeros(table: &KernelTable) -> Self {
        Self::new(Field::zeros(table.grid), table).expect("grid matches by construction")
    }
}

/// Output-injection mismatches at the two boundaries:
/// inj₀ = (e^{−(a/ε)ũ(0)} − 1)e^{−(a/ε)uʳ(0)} − v̂(0),
/// inj₁ = (e^{−(a/ε)ũ(1)} − 1)e^{−(ab/2ε)−(a/ε)uʳ(1)} − v̂(1),
/// with ũ(·) = u(·) − uʳ(·) read from boundary measurements only.
pub fn boundary_injections(
    u0_meas: f64,
    u1_meas: f64,
    ur0: f64,
    ur1: f64,
    v_hat: &Field,
    p: &Params,
) -> Result<(f64, f64)> {
    let r = p.a_over_eps();
    let w = p.ab_over_2eps();
    let guard = |arg: f64, node: usize| -> Result<f64> {
        if !arg.is_finite() || arg.abs() > EXP_GUARD {
            return Err(Error::Overflow {
                node,
                exponent: arg,
            });
        }
        Ok(arg.exp())
    };
    let ut0 = u0_meas - ur0;
    let ut1 = u1_meas - ur1;
    let inj0 = (guard(-r * ut0, 0)? - 1.0) * guard(-r * ur0, 0)? - v_hat.first();
    let inj1 = (guard(-r * ut1, v_hat.grid().n() - 1)? - 1.0)
        * guard(-w - r * ur1, v_hat.grid().n() - 1)?
        - v_hat.last();
    Ok((inj0, inj1))
}

/// Time derivative of the observer state:
/// ε v̂_xx − (a²b²/4ε) v̂ + p₂(x)·inj₀ + p₁(x)·inj₁, with Neumann data
/// v̂_x(0) = Ṽ₀ + p₀₀·inj₀ and v̂_x(1) = Ṽ₁ + p₁₁·inj₁ imposed through
/// ghost nodes.
pub fn observer_rhs(
    state: &ObserverState,
    injections: (f64, f64),
    v_inputs: (f64, f64),
    p: &Params,
) -> Result<Field> {
    let v = &state.v_hat;
    if v.grid() != state.p1.grid() {
        return Err(Error::GridMismatch(v.grid().n(), state.p1.grid().n()));
    }
    let n = v.grid().n();
    let h = v.grid().spacing();
    let beta = p.reaction_rate();
    let (inj0, inj1) = injections;
    let g0 = v_inputs.0 + state.p00 * inj0;
    let g1 = v_inputs.1 + state.p11 * inj1;
    let vals = v.values();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let vxx = if i == 0 {
            (2.0 * vals[1] - 2.0 * vals[0] - 2.0 * h * g0) / (h * h)
        } else if i == n - 1 {
            (2.0 * vals[n - 2] - 2.0 * vals[n - 1] + 2.0 * h * g1) / (h * h)
        } else {
            (vals[i + 1] - 2.0 * vals[i] + vals[i - 1]) / (h * h)
        };
        out.push(
            p.epsilon() * vxx - beta * vals[i] + state.p2.get(i) * inj0 + state.p1.get(i) * inj1,
        );
    }
    Field::new(v.grid(), out)
}
