//! Quadrature and the norms used throughout the designs.
//!
//! The H¹ norm follows the convention √(∫f²) + √(∫f_x²) — a sum of two
//! root-integrals, not the root of a sum.

use crate::error::{Error, Result};
use crate::grid::Field;

/// Quadrature weights over `npts` uniformly spaced samples with spacing `h`.
///
/// Composite Simpson for an odd sample count; for an even count, Simpson over
/// the first `npts − 1` samples with a trapezoid rule on the final interval.
pub fn quad_weights(npts: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; npts];
    if npts < 2 {
        return w;
    }
    if npts == 2 {
        w[0] = 0.5 * h;
        w[1] = 0.5 * h;
        return w;
    }
    let simpson_pts = if npts.is_multiple_of(2) {
        npts - 1
    } else {
        npts
    };
    w[0] = h / 3.0;
    w[simpson_pts - 1] += h / 3.0;
    for (i, wi) in w.iter_mut().enumerate().take(simpson_pts - 1).skip(1) {
        *wi = if i % 2 == 1 {
            4.0 * h / 3.0
        } else {
            2.0 * h / 3.0
        };
    }
    if npts.is_multiple_of(2) {
        w[npts - 2] += 0.5 * h;
        w[npts - 1] += 0.5 * h;
    }
    w
}

/// Integrate raw uniformly spaced samples (no finiteness checks).
pub fn integrate_slice(vals: &[f64], h: f64) -> f64 {
    quad_weights(vals.len(), h)
        .iter()
        .zip(vals)
        .map(|(w, v)| w * v)
        .sum()
}

/// ∫₀¹ f(x) dx by composite Simpson (trapezoid tail when the node count is
/// even). Rejects non-finite samples with the offending node index.
pub fn integrate(f: &Field) -> Result<f64> {
    if let Some(node) = f.first_non_finite() {
        return Err(Error::NonFinite { node });
    }
    Ok(integrate_slice(f.values(), f.grid().spacing()))
}

/// Spatial derivative by second-order central differences, with one-sided
/// second-order three-point stencils at the boundary nodes.
pub fn derivative(f: &Field) -> Field {
    let n = f.grid().n();
    let h = f.grid().spacing();
    let v = f.values();
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    Field::new(f.grid(), d).expect("same length")
}

/// ‖f‖_{H¹} = √(∫f²) + √(∫f_x²).
pub fn h1_norm(f: &Field) -> Result<f64> {
    let l2_sq = integrate(&f.zip_with(f, |a, b| a * b)?)?;
    let fx = derivative(f);
    let dx_sq = integrate(&fx.zip_with(&fx, |a, b| a * b)?)?;
    Ok(l2_sq.max(0.0).sqrt() + dx_sq.max(0.0).sqrt())
}

/// max |f(x_i)| over the grid.
pub fn sup_norm(f: &Field) -> f64 {
    f.values().iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    #[test]
    fn integrate_constant_is_exact() {
        let f = Field::constant(grid(101), 1.0);
        assert_relative_eq!(integrate(&f).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn integrate_zero_field() {
        let f = Field::zeros(grid(101));
        assert_eq!(integrate(&f).unwrap(), 0.0);
    }

    #[test]
    fn integrate_quadratic() {
        let f = Field::from_fn(grid(401), |x| x * x);
        assert_relative_eq!(integrate(&f).unwrap(), 1.0 / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn integrate_even_node_count_falls_back_to_trapezoid_tail() {
        // x^2 on an even grid: Simpson-dominant, tail only second order.
        let f = Field::from_fn(grid(400), |x| x * x);
        assert_relative_eq!(integrate(&f).unwrap(), 1.0 / 3.0, epsilon = 1e-7);
    }

    #[test]
    fn integrate_rejects_non_finite_with_node_index() {
        let g = grid(11);
        let mut vals = vec![0.0; 11];
        vals[7] = f64::NAN;
        let f = Field::new(g, vals).unwrap();
        assert_eq!(integrate(&f), Err(Error::NonFinite { node: 7 }));
    }

    #[test]
    fn h1_norm_zero_field() {
        assert_eq!(h1_norm(&Field::zeros(grid(101))).unwrap(), 0.0);
    }

    #[test]
    fn h1_norm_linear_profile() {
        // f = x: sqrt(1/3) + 1
        let f = Field::from_fn(grid(401), |x| x);
        let expected = (1.0f64 / 3.0).sqrt() + 1.0;
        assert_relative_eq!(h1_norm(&f).unwrap(), expected, epsilon = 1e-6);
    }

    #[test]
    fn h1_norm_sine_profile() {
        // f = sin(pi x): sqrt(1/2) + pi sqrt(1/2); second-order differences
        // leave a relative error of (pi h)^2/6 ~ 1e-5 at n = 401.
        let f = Field::from_fn(grid(401), |x| (std::f64::consts::PI * x).sin());
        let expected = 0.5f64.sqrt() + std::f64::consts::PI * 0.5f64.sqrt();
        assert_relative_eq!(h1_norm(&f).unwrap(), expected, max_relative = 1e-5);
    }

    #[test]
    fn h1_norm_vanishes_only_for_zero() {
        let mut vals = vec![0.0; 201];
        vals[100] = 1e-6;
        let f = Field::new(grid(201), vals).unwrap();
        assert!(h1_norm(&f).unwrap() > 1e-12);
    }

    #[test]
    fn sup_norm_cases() {
        assert_eq!(sup_norm(&Field::zeros(grid(101))), 0.0);
        let f = Field::from_fn(grid(101), |x| x - 0.5);
        assert_eq!(sup_norm(&f), 0.5);
    }

    /// Smooth random fields from a short Fourier sum.
    fn fourier_field(g: Grid, coefs: &[f64]) -> Field {
        Field::from_fn(g, |x| {
            coefs
                .iter()
                .enumerate()
                .map(|(j, c)| c * ((j + 1) as f64 * std::f64::consts::PI * x).cos())
                .sum()
        })
    }

    proptest! {
        #[test]
        fn sup_bounded_by_twice_h1(coefs in proptest::collection::vec(-1.0f64..1.0, 1..5)) {
            let f = fourier_field(grid(201), &coefs);
            let h1 = h1_norm(&f).unwrap();
            prop_assert!(sup_norm(&f) <= 2.0 * h1 + 1e-6);
        }

        #[test]
        fn integrate_is_linear(
            ca in proptest::collection::vec(-1.0f64..1.0, 3),
            cb in proptest::collection::vec(-1.0f64..1.0, 3),
            alpha in -10.0f64..10.0,
            beta in -10.0f64..10.0,
        ) {
            let g = grid(201);
            let f = fourier_field(g, &ca);
            let q = fourier_field(g, &cb);
            let combo = f.zip_with(&q, |a, b| alpha * a + beta * b).unwrap();
            let lhs = integrate(&combo).unwrap();
            let rhs = alpha * integrate(&f).unwrap() + beta * integrate(&q).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }
    }
}
