//! Discrete application of the backstepping integral transforms.
//!
//! Each transform is `out = f + M f` where M folds the kernel values and the
//! oriented quadrature weights into one dense matrix, built once per
//! (grid, rate) pair and reused across time steps. The grid is symmetric
//! about ½, so every integration bound (x, 1−x, 0, 1) falls exactly on a
//! node.

use crate::grid::{Field, Grid};
use crate::kernels::{inverse_kernel_shifted, kernel_shifted};

/// w(x) = f(x) + Σ_j M[i][j] f(x_j), dense row-major coefficients.
#[derive(Debug, Clone)]
pub struct IntegralOperator {
    grid: Grid,
    coef: Vec<f64>,
}

enum Kind {
    ControlDirect,
    ControlInverse,
    ObserverDirect,
    ObserverInverse,
}

/// Fourth-order weights for ∫ over the node range [lo, hi]: composite
/// Simpson for even interval counts, Simpson 3/8 on the final three
/// intervals for odd counts ≥ 3. A single-interval range integrates the
/// cubic through the two range nodes plus two neighbors on `side`
/// (−1 = extend left, +1 = extend right), so its weight stencil reaches
/// outside [lo, hi].
fn add_range_weights(row: &mut [f64], lo: usize, hi: usize, h: f64, sign: f64, side: i32) {
    if hi <= lo {
        return;
    }
    let m = hi - lo;
    if m == 1 {
        let c = sign * h / 24.0;
        if side < 0 && lo >= 2 {
            row[lo - 2] += c;
            row[lo - 1] += -5.0 * c;
            row[lo] += 19.0 * c;
            row[hi] += 9.0 * c;
        } else if hi + 2 < row.len() {
            row[lo] += 9.0 * c;
            row[hi] += 19.0 * c;
            row[hi + 1] += -5.0 * c;
            row[hi + 2] += c;
        } else {
            // tiny grids only: no room for the cubic stencil
            row[lo] += sign * h / 2.0;
            row[hi] += sign * h / 2.0;
        }
        return;
    }
    let simpson_hi = if m.is_multiple_of(2) { hi } else { hi - 3 };
    if simpson_hi > lo {
        row[lo] += sign * h / 3.0;
        row[simpson_hi] += sign * h / 3.0;
        for (off, r) in row[lo + 1..simpson_hi].iter_mut().enumerate() {
            let w = if off.is_multiple_of(2) { 4.0 } else { 2.0 };
            *r += sign * w * h / 3.0;
        }
    }
    if !m.is_multiple_of(2) {
        // m == 3 leaves simpson_hi == lo and the 3/8 rule covers everything
        let c = sign * 3.0 * h / 8.0;
        row[hi - 3] += c;
        row[hi - 2] += 3.0 * c;
        row[hi - 1] += 3.0 * c;
        row[hi] += c;
    }
}

impl IntegralOperator {
    /// w = ṽ − ∮_{1−x}^{x} k(x, ξ) ṽ(ξ) dξ (oriented: negative for x < ½).
    pub fn control_direct(grid: Grid, c1: f64, eps: f64) -> Self {
        Self::build(grid, c1, eps, Kind::ControlDirect)
    }

    /// ṽ = w + ∮_{1−x}^{x} l(x, ξ) w(ξ) dξ.
    pub fn control_inverse(grid: Grid, c1: f64, eps: f64) -> Self {
        Self::build(grid, c1, eps, Kind::ControlInverse)
    }

    /// ē from w̄ through the observer kernel P, honoring the piecewise
    /// split at x = ½.
    pub fn observer_direct(grid: Grid, c2: f64, eps: f64) -> Self {
        Self::build(grid, c2, eps, Kind::ObserverDirect)
    }

    /// w̄ from ē through the J₁-mirror kernel p̄.
    pub fn observer_inverse(grid: Grid, c2: f64, eps: f64) -> Self {
        Self::build(grid, c2, eps, Kind::ObserverInverse)
    }

    fn build(grid: Grid, c: f64, eps: f64, kind: Kind) -> Self {
        let n = grid.n();
        let h = grid.spacing();
        let mut coef = vec![0.0; n * n];
        let mut scratch = vec![0.0; n];
        // signed quadrature of ker(ξ)·f(ξ) over node range [lo, hi], folded
        // into row i; `side` picks the neighbor direction for the cubic
        // end rule (the kernel formulas extend smoothly past the range)
        let add = |row: &mut [f64],
                   scratch: &mut Vec<f64>,
                   lo: usize,
                   hi: usize,
                   sign: f64,
                   side: i32,
                   ker: &dyn Fn(f64) -> f64| {
            if hi <= lo {
                return;
            }
            scratch.iter_mut().for_each(|v| *v = 0.0);
            add_range_weights(scratch, lo, hi, h, sign, side);
            for (j, w) in scratch.iter().enumerate() {
                if *w != 0.0 {
                    row[j] += w * ker(grid.node(j));
                }
            }
        };
        for i in 0..n {
            let x = grid.node(i);
            let z = x - 0.5;
            let mirror = n - 1 - i;
            let row = &mut coef[i * n..(i + 1) * n];
            match kind {
                Kind::ControlDirect | Kind::ControlInverse => {
                    // oriented integral from 1-x to x
                    let (lo, hi) = (i.min(mirror), i.max(mirror));
                    let orient = if i >= mirror { 1.0 } else { -1.0 };
                    match kind {
                        Kind::ControlDirect => add(row, &mut scratch, lo, hi, -orient, 1, &|xi| {
                            kernel_shifted(z, xi - 0.5, c, eps)
                        }),
                        Kind::ControlInverse => add(row, &mut scratch, lo, hi, orient, 1, &|xi| {
                            inverse_kernel_shifted(z, xi - 0.5, c, eps)
                        }),
                        _ => unreachable!(),
                    }
                }
                Kind::ObserverDirect => {
                    // z >= 0: -∫_x^1 + ∫_0^{1-x}; z < 0: +∫_0^x - ∫_{1-x}^1
                    let ker = |xi: f64| kernel_shifted(xi - 0.5, z, c, eps);
                    if i >= mirror {
                        add(row, &mut scratch, i, n - 1, -1.0, -1, &ker);
                        add(row, &mut scratch, 0, mirror, 1.0, 1, &ker);
                    } else {
                        add(row, &mut scratch, 0, i, 1.0, 1, &ker);
                        add(row, &mut scratch, mirror, n - 1, -1.0, -1, &ker);
                    }
                }
                Kind::ObserverInverse => {
                    let ker = |xi: f64| inverse_kernel_shifted(xi - 0.5, z, c, eps);
                    if i >= mirror {
                        add(row, &mut scratch, i, n - 1, 1.0, -1, &ker);
                        add(row, &mut scratch, 0, mirror, -1.0, 1, &ker);
                    } else {
                        add(row, &mut scratch, 0, i, -1.0, 1, &ker);
                        add(row, &mut scratch, mirror, n - 1, 1.0, -1, &ker);
                    }
                }
            }
        }
        Self { grid, coef }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn apply(&self, f: &Field) -> Field {
        let n = self.grid.n();
        debug_assert_eq!(f.grid(), self.grid);
        let v = f.values();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let row = &self.coef[i * n..(i + 1) * n];
            let acc: f64 = row.iter().zip(v).map(|(c, vj)| c * vj).sum();
            out.push(v[i] + acc);
        }
        Field::new(self.grid, out).expect("same grid")
    }
}
