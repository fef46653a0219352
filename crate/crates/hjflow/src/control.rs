//! Boundary feedback laws in the original physical variable.
//!
//! Four families: bilateral full-state, observer-based output feedback,
//! static collocated, and the unilateral comparison baseline. Every law
//! returns exactly the feedforward pair when the tracking error vanishes.

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::kernels::{unilateral_kernel_k1, unilateral_kernel_k1x, KernelTable};
use crate::params::Params;
use crate::quad::integrate;
use crate::transforms::EXP_GUARD;

/// Neumann boundary inputs applied at x = 0 and x = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryInput {
    pub u0: f64,
    pub u1: f64,
}

fn guard_exp(arg: f64, node: usize) -> Result<f64> {
    if !arg.is_finite() || arg.abs() > EXP_GUARD {
        return Err(Error::Overflow {
            node,
            exponent: arg,
        });
    }
    Ok(arg.exp())
}

/// Backstepping boundary values for the transformed error state:
/// Ṽ₀ = k(0,0)ṽ(0) − ∫₀¹ k_x(0,ξ)ṽ(ξ)dξ,
/// Ṽ₁ = k(1,1)ṽ(1) + ∫₀¹ k_x(1,ξ)ṽ(ξ)dξ.
pub fn backstepping_v(v_tilde: &Field, table: &KernelTable) -> Result<(f64, f64)> {
    if v_tilde.grid() != table.grid {
        return Err(Error::GridMismatch(v_tilde.grid().n(), table.grid.n()));
    }
    let weighted0 = Field::new(
        table.grid,
        table
            .k_row0
            .iter()
            .zip(v_tilde.values())
            .map(|(k, v)| k * v)
            .collect(),
    )?;
    let weighted1 = Field::new(
        table.grid,
        table
            .k_row1
            .iter()
            .zip(v_tilde.values())
            .map(|(k, v)| k * v)
            .collect(),
    )?;
    let v0 = table.k_diag0 * v_tilde.first() - integrate(&weighted0)?;
    let v1 = table.k_diag1 * v_tilde.last() + integrate(&weighted1)?;
    Ok((v0, v1))
}

/// Shared core of the two nonlinear bilateral laws. `integral0`/`integral1`
/// are the ∫ k_x(0,·)(...)dξ and ∫ k_x(1,·)(...)dξ values.
#[allow(clippy::too_many_arguments)]
fn bilateral_from_integrals(
    ut0: f64,
    ut1: f64,
    ur0: f64,
    ur1: f64,
    u0r: f64,
    u1r: f64,
    integral0: f64,
    integral1: f64,
    table: &KernelTable,
    p: &Params,
) -> Result<BoundaryInput> {
    let r = p.a_over_eps();
    let w = p.ab_over_2eps();
    let e_ut0 = guard_exp(r * ut0, 0)?;
    let e_ut1 = guard_exp(r * ut1, table.grid.n() - 1)?;
    let u0 = -(p.epsilon() / p.a())
        * e_ut0
        * ((table.k_diag0 + w) * (guard_exp(-r * ut0, 0)? - 1.0)
            - guard_exp(r * ur0, 0)? * integral0)
        + u0r * e_ut0;
    let u1 = -(p.epsilon() / p.a())
        * e_ut1
        * ((table.k_diag1 + w) * (guard_exp(-r * ut1, table.grid.n() - 1)? - 1.0)
            + guard_exp(w + r * ur1, table.grid.n() - 1)? * integral1)
        + u1r * e_ut1;
    Ok(BoundaryInput { u0, u1 })
}

/// Bilateral full-state feedback in the physical variables: exponential
/// prefactors, augmented kernel diagonals, and k_x-weighted integrals of the
/// transformed tracking error, plus the feedforward carried through
/// e^{(a/ε)ũ} factors.
pub fn fullstate_bilateral(
    u: &Field,
    ur: &Field,
    u0r: f64,
    u1r: f64,
    table: &KernelTable,
    p: &Params,
) -> Result<BoundaryInput> {
    u.check_same_grid(ur)?;
    if u.grid() != table.grid {
        return Err(Error::GridMismatch(u.grid().n(), table.grid.n()));
    }
    let r = p.a_over_eps();
    let w = p.ab_over_2eps();
    let grid = u.grid();
    // integrand: k_x(·,ξ) e^{-(ab/2ε)ξ - (a/ε)u^r(ξ)} (e^{-(a/ε)ũ(ξ)} - 1)
    let mut w0 = Vec::with_capacity(grid.n());
    let mut w1 = Vec::with_capacity(grid.n());
    for i in 0..grid.n() {
        let x = grid.node(i);
        let ut = u.get(i) - ur.get(i);
        let core = (guard_exp(-r * ut, i)? - 1.0) * guard_exp(-w * x - r * ur.get(i), i)?;
        w0.push(table.k_row0[i] * core);
        w1.push(table.k_row1[i] * core);
    }
    let integral0 = integrate(&Field::new(grid, w0)?)?;
    let integral1 = integrate(&Field::new(grid, w1)?)?;
    let ut0 = u.first() - ur.first();
    let ut1 = u.last() - ur.last();
    bilateral_from_integrals(
        ut0,
        ut1,
        ur.first(),
        ur.last(),
        u0r,
        u1r,
        integral0,
        integral1,
        table,
        p,
    )
}

/// Observer-based output feedback: the boundary terms use the measured
/// traces u(0), u(1) while the integrals run over the observer state v̂.
#[allow(clippy::too_many_arguments)]
pub fn output_feedback(
    u0_meas: f64,
    u1_meas: f64,
    v_hat: &Field,
    ur: &Field,
    u0r: f64,
    u1r: f64,
    table: &KernelTable,
    p: &Params,
) -> Result<BoundaryInput> {
    v_hat.check_same_grid(ur)?;
    if v_hat.grid() != table.grid {
        return Err(Error::GridMismatch(v_hat.grid().n(), table.grid.n()));
    }
    let grid = v_hat.grid();
    let w0 = Field::new(
        grid,
        table
            .k_row0
            .iter()
            .zip(v_hat.values())
            .map(|(k, v)| k * v)
            .collect(),
    )?;
    let w1 = Field::new(
        grid,
        table
            .k_row1
            .iter()
            .zip(v_hat.values())
            .map(|(k, v)| k * v)
            .collect(),
    )?;
    let integral0 = integrate(&w0)?;
    let integral1 = integrate(&w1)?;
    let ut0 = u0_meas - ur.first();
    let ut1 = u1_meas - ur.last();
    bilateral_from_integrals(
        ut0,
        ut1,
        ur.first(),
        ur.last(),
        u0r,
        u1r,
        integral0,
        integral1,
        table,
        p,
    )
}

/// Static collocated law: U₀ = (b/2)(e^{(a/ε)ũ(0)} − 1) + U₀ʳ e^{(a/ε)ũ(0)},
/// symmetric at x = 1. Stabilizes only for b ≠ 0 and at a rate fixed by the
/// plant parameters.
pub fn static_collocated(
    ut0: f64,
    ut1: f64,
    u0r: f64,
    u1r: f64,
    p: &Params,
) -> Result<BoundaryInput> {
    let r = p.a_over_eps();
    let e0 = guard_exp(r * ut0, 0)?;
    let e1 = guard_exp(r * ut1, usize::MAX)?;
    Ok(BoundaryInput {
        u0: p.b() / 2.0 * (e0 - 1.0) + u0r * e0,
        u1: p.b() / 2.0 * (e1 - 1.0) + u1r * e1,
    })
}

/// Unilateral comparison baseline: pure feedforward at x = 0, and the
/// single-sided backstepping law with kernel k₁ at x = 1.
pub fn unilateral_baseline(
    u: &Field,
    ur: &Field,
    u0r: f64,
    u1r: f64,
    p: &Params,
) -> Result<BoundaryInput> {
    u.check_same_grid(ur)?;
    let r = p.a_over_eps();
    let w = p.ab_over_2eps();
    let grid = u.grid();
    let (c1, eps) = (p.c1(), p.epsilon());
    let mut vals = Vec::with_capacity(grid.n());
    for i in 0..grid.n() {
        let x = grid.node(i);
        let ut = u.get(i) - ur.get(i);
        let core = (guard_exp(-r * ut, i)? - 1.0) * guard_exp(-w * x - r * ur.get(i), i)?;
        vals.push(unilateral_kernel_k1x(1.0, x, c1, eps) * core);
    }
    let integral = integrate(&Field::new(grid, vals)?)?;
    let ut1 = u.last() - ur.last();
    let e1 = guard_exp(r * ut1, grid.n() - 1)?;
    let k11 = unilateral_kernel_k1(1.0, 1.0, c1, eps);
    let u1 = -(p.epsilon() / p.a())
        * e1
        * ((k11 + w) * (guard_exp(-r * ut1, grid.n() - 1)? - 1.0)
            + guard_exp(w + r * ur.last(), grid.n() - 1)? * integral)
        + u1r * e1;
    Ok(BoundaryInput { u0: u0r, u1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::kernels::build_kernel_table;
    use crate::trajgen;
    use crate::transforms::error_transform;
    use approx::assert_relative_eq;

    fn traffic_state(g: Grid) -> (Field, Field) {
        let ur = Field::from_fn(g, |x| (1.0 - x) / 2.0);
        let u = Field::from_fn(g, |x| {
            (1.0 - x) / 2.0 + 0.1 * (std::f64::consts::PI * x).sin()
        });
        (u, ur)
    }

    #[test]
    fn backstepping_v_trivials() {
        let g = Grid::new(101).unwrap();
        let p = Params::traffic();
        let table = build_kernel_table(g, &p);
        let (v0, v1) = backstepping_v(&Field::zeros(g), &table).unwrap();
        assert_eq!((v0, v1), (0.0, 0.0));

        let p0 = Params::new(0.25, 1.0, 1.0, 0.0, 1.0).unwrap();
        let table0 = build_kernel_table(g, &p0);
        let f = Field::from_fn(g, |x| (std::f64::consts::PI * x).sin());
        let (v0, v1) = backstepping_v(&f, &table0).unwrap();
        assert_eq!((v0, v1), (0.0, 0.0));
    }

    #[test]
    fn backstepping_v_against_refined_quadrature() {
        // golden values from the same integrand on an n = 4001 grid
        let p = Params::traffic();
        let coarse = Grid::new(401).unwrap();
        let fine = Grid::new(4001).unwrap();
        let f_c = Field::from_fn(coarse, |x| (std::f64::consts::PI * x).sin());
        let f_f = Field::from_fn(fine, |x| (std::f64::consts::PI * x).sin());
        let (v0c, v1c) = backstepping_v(&f_c, &build_kernel_table(coarse, &p)).unwrap();
        let (v0f, v1f) = backstepping_v(&f_f, &build_kernel_table(fine, &p)).unwrap();
        assert_relative_eq!(v0c, v0f, epsilon = 1e-9);
        assert_relative_eq!(v1c, v1f, epsilon = 1e-9);
    }

    #[test]
    fn fullstate_on_trajectory_returns_feedforward() {
        let g = Grid::new(201).unwrap();
        let p = Params::traffic();
        let table = build_kernel_table(g, &p);
        let ur = Field::from_fn(g, |x| (1.0 - x) / 2.0);
        let inp = fullstate_bilateral(&ur, &ur, -0.5, -0.5, &table, &p).unwrap();
        assert_eq!(inp.u0, -0.5);
        assert_eq!(inp.u1, -0.5);
    }

    #[test]
    fn fullstate_matches_refined_quadrature() {
        let p = Params::traffic();
        let coarse = Grid::new(401).unwrap();
        let fine = Grid::new(4001).unwrap();
        let (uc, urc) = traffic_state(coarse);
        let (uf, urf) = traffic_state(fine);
        let ic = fullstate_bilateral(&uc, &urc, -0.5, -0.5, &build_kernel_table(coarse, &p), &p)
            .unwrap();
        let if_ =
            fullstate_bilateral(&uf, &urf, -0.5, -0.5, &build_kernel_table(fine, &p), &p).unwrap();
        assert_relative_eq!(ic.u0, if_.u0, epsilon = 1e-9);
        assert_relative_eq!(ic.u1, if_.u1, epsilon = 1e-9);
    }

    #[test]
    fn fullstate_agrees_with_transform_then_backstep_route() {
        // second route: error transform, backstepping V, then the exact
        // algebra that maps the transformed inputs back to U0, U1
        let p = Params::traffic();
        let g = Grid::new(201).unwrap();
        let table = build_kernel_table(g, &p);
        let plan = trajgen::traffic_plan(30, 1e-13).unwrap();
        let t = 0.7;
        let (vr, vr_x) = trajgen::series_reference(&plan, &p, t, g).unwrap();
        let prof = trajgen::reference_profile(&vr, &vr_x, &p).unwrap();
        let u = Field::from_fn(g, |x| {
            t / 4.0 + (1.0 - x) / 2.0 + 0.08 * (std::f64::consts::PI * x).sin()
                - 0.03 * (2.0 * std::f64::consts::PI * x).cos()
        });
        let route1 = fullstate_bilateral(&u, &prof.ur, prof.u0r, prof.u1r, &table, &p).unwrap();

        let ut = u.zip_with(&prof.ur, |a, b| a - b).unwrap();
        let vt = error_transform(&ut, &prof.ur, &p).unwrap();
        let (v0, v1) = backstepping_v(&vt, &table).unwrap();
        let r = p.a_over_eps();
        let w = p.ab_over_2eps();
        // (til1er1)/(til2er1) with u_x^r at the ends equal to the feedforward
        let vbar0 = (r * prof.ur.first()).exp() * v0
            + r * (p.b() / 2.0 + prof.u0r) * ((-r * ut.first()).exp() - 1.0);
        let vbar1 = (w + r * prof.ur.last()).exp() * v1
            + r * (p.b() / 2.0 + prof.u1r) * ((-r * ut.last()).exp() - 1.0);
        // U = Ũ + Uʳ with Ũ = -(ε/a) e^{(a/ε)ũ} V̄̃
        let u0 = -(p.epsilon() / p.a()) * (r * ut.first()).exp() * vbar0 + prof.u0r;
        let u1 = -(p.epsilon() / p.a()) * (r * ut.last()).exp() * vbar1 + prof.u1r;
        assert_relative_eq!(route1.u0, u0, epsilon = 1e-10);
        assert_relative_eq!(route1.u1, u1, epsilon = 1e-10);
    }

    #[test]
    fn output_feedback_with_perfect_estimate_matches_fullstate() {
        let p = Params::traffic();
        let g = Grid::new(201).unwrap();
        let table = build_kernel_table(g, &p);
        let (u, ur) = traffic_state(g);
        let ut = u.zip_with(&ur, |a, b| a - b).unwrap();
        let v_hat = error_transform(&ut, &ur, &p).unwrap();
        let full = fullstate_bilateral(&u, &ur, -0.5, -0.5, &table, &p).unwrap();
        let obs =
            output_feedback(u.first(), u.last(), &v_hat, &ur, -0.5, -0.5, &table, &p).unwrap();
        assert_relative_eq!(full.u0, obs.u0, epsilon = 1e-12);
        assert_relative_eq!(full.u1, obs.u1, epsilon = 1e-12);
    }

    #[test]
    fn output_feedback_trivial_cases() {
        let p = Params::traffic();
        let g = Grid::new(101).unwrap();
        let table = build_kernel_table(g, &p);
        let ur = Field::from_fn(g, |x| (1.0 - x) / 2.0);
        // zero estimate, zero boundary error -> feedforward
        let inp = output_feedback(
            ur.first(),
            ur.last(),
            &Field::zeros(g),
            &ur,
            -0.5,
            -0.5,
            &table,
            &p,
        )
        .unwrap();
        assert_eq!(inp.u0, -0.5);
        assert_eq!(inp.u1, -0.5);
    }

    #[test]
    fn output_feedback_golden_zero_estimate() {
        let p = Params::traffic();
        let coarse = Grid::new(401).unwrap();
        let fine = Grid::new(4001).unwrap();
        let (uc, urc) = traffic_state(coarse);
        let (uf, urf) = traffic_state(fine);
        let ic = output_feedback(
            uc.first(),
            uc.last(),
            &Field::zeros(coarse),
            &urc,
            -0.5,
            -0.5,
            &build_kernel_table(coarse, &p),
            &p,
        )
        .unwrap();
        let if_ = output_feedback(
            uf.first(),
            uf.last(),
            &Field::zeros(fine),
            &urf,
            -0.5,
            -0.5,
            &build_kernel_table(fine, &p),
            &p,
        )
        .unwrap();
        assert_relative_eq!(ic.u0, if_.u0, epsilon = 1e-9);
        assert_relative_eq!(ic.u1, if_.u1, epsilon = 1e-9);
    }

    #[test]
    fn static_law_trivials_and_scalar_value() {
        let p = Params::traffic();
        let inp = static_collocated(0.0, 0.0, -0.5, -0.5, &p).unwrap();
        assert_eq!(inp.u0, -0.5);
        assert_eq!(inp.u1, -0.5);

        // a = b = 1, eps = 0.25, utilde(0) = 0.05, U0r = -1/2:
        // 0.5 (e^{0.2} - 1) - 0.5 e^{0.2} = -0.5 exactly
        let inp = static_collocated(0.05, 0.0, -0.5, -0.5, &p).unwrap();
        assert_relative_eq!(inp.u0, -0.5, epsilon = 1e-14);

        // b = 0: first term vanishes
        let p0 = Params::new(0.5, -1.0, 0.0, 1.0, 1.0).unwrap();
        let inp = static_collocated(0.1, 0.0, 0.3, 0.0, &p0).unwrap();
        assert_relative_eq!(inp.u0, 0.3 * (-2.0f64 * 0.1).exp(), epsilon = 1e-14);
    }

    #[test]
    fn unilateral_trivials_and_effort_comparison() {
        let p = Params::traffic();
        let g = Grid::new(401).unwrap();
        let ur = Field::from_fn(g, |x| (1.0 - x) / 2.0);
        let inp = unilateral_baseline(&ur, &ur, -0.5, -0.5, &p).unwrap();
        assert_eq!(inp.u0, -0.5);
        assert_eq!(inp.u1, -0.5);

        // golden value against refined quadrature + larger effort than bilateral
        let fine = Grid::new(4001).unwrap();
        let (uc, urc) = traffic_state(g);
        let (uf, urf) = traffic_state(fine);
        let uni_c = unilateral_baseline(&uc, &urc, -0.5, -0.5, &p).unwrap();
        let uni_f = unilateral_baseline(&uf, &urf, -0.5, -0.5, &p).unwrap();
        assert_relative_eq!(uni_c.u1, uni_f.u1, epsilon = 1e-8);

        let table = build_kernel_table(g, &p);
        let bil = fullstate_bilateral(&uc, &urc, -0.5, -0.5, &table, &p).unwrap();
        assert!(
            (uni_c.u1 - (-0.5)).abs() > (bil.u1 - (-0.5)).abs(),
            "unilateral correction {:.4} should exceed bilateral {:.4}",
            uni_c.u1,
            bil.u1
        );
    }

    #[test]
    fn quadrature_convergence_is_fourth_order() {
        let p = Params::traffic();
        let reference = {
            let g = Grid::new(4001).unwrap();
            let (u, ur) = traffic_state(g);
            fullstate_bilateral(&u, &ur, -0.5, -0.5, &build_kernel_table(g, &p), &p).unwrap()
        };
        let err = |n: usize| {
            let g = Grid::new(n).unwrap();
            let (u, ur) = traffic_state(g);
            let i =
                fullstate_bilateral(&u, &ur, -0.5, -0.5, &build_kernel_table(g, &p), &p).unwrap();
            (i.u0 - reference.u0).abs().max((i.u1 - reference.u1).abs())
        };
        let e201 = err(201);
        let e801 = err(801);
        assert!(
            e801 < e201 / 50.0,
            "expected ~(n ratio)^4 = 256x drop, got {e201:.3e} -> {e801:.3e}"
        );
    }
}
