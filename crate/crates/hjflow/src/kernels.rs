//! Bessel functions and the closed-form backstepping kernels.
//!
//! The control kernel k (modified Bessel I₁), its inverse l (Bessel J₁) and
//! the observer kernel P all share the structure
//!     −(c/2ε)·φ(q)·(x + ξ − 1),   q = ±(c/ε)((x−½)² − (ξ−½)²),
//! where φ(q) = I₁(√q)/√q is entire in q: evaluating the series in q handles
//! the removable singularity on the characteristics uniformly, and the q < 0
//! branch is exactly the J₁ analogue.

use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::params::Params;

/// Largest Bessel argument supported by the series evaluation.
pub const BESSEL_RANGE: f64 = 50.0;

const SERIES_TOL: f64 = 1e-17;

/// φ(q) = I₁(√q)/√q = Σ_m (q/4)^m / (2·m!(m+1)!), entire in q.
/// For q < 0 this evaluates J₁(√−q)/√−q.
pub(crate) fn i1_over_s_from_q(q: f64) -> f64 {
    let mut term = 0.5;
    let mut sum = term;
    let mut m = 0usize;
    loop {
        m += 1;
        term *= (q / 4.0) / (m as f64 * (m as f64 + 1.0));
        sum += term;
        if term.abs() < SERIES_TOL * sum.abs().max(1.0) || m > 200 {
            return sum;
        }
    }
}

/// φ'(q) = Σ_m (q/4)^m / (8·m!(m+2)!), entire in q.
pub(crate) fn i1_over_s_from_q_prime(q: f64) -> f64 {
    let mut term = 1.0 / 16.0; // m = 0: 1/(8·0!·2!)
    let mut sum = term;
    let mut m = 0usize;
    loop {
        m += 1;
        term *= (q / 4.0) / (m as f64 * (m as f64 + 2.0));
        sum += term;
        if term.abs() < SERIES_TOL * sum.abs().max(1.0) || m > 200 {
            return sum;
        }
    }
}

/// I₀(s) = Σ (s/2)^{2m}/(m!)².
pub fn bessel_i0(s: f64) -> Result<f64> {
    check_range(s)?;
    let q = s * s;
    let mut term = 1.0;
    let mut sum = term;
    let mut m = 0usize;
    loop {
        m += 1;
        term *= (q / 4.0) / (m as f64 * m as f64);
        sum += term;
        if term.abs() < SERIES_TOL * sum.abs().max(1.0) || m > 200 {
            return Ok(sum);
        }
    }
}

/// J₀(s): as I₀ with alternating signs.
pub fn bessel_j0(s: f64) -> Result<f64> {
    check_range(s)?;
    let q = s * s;
    let mut term = 1.0;
    let mut sum = term;
    let mut m = 0usize;
    loop {
        m += 1;
        term *= (-q / 4.0) / (m as f64 * m as f64);
        sum += term;
        if term.abs() < SERIES_TOL * sum.abs().max(1.0) || m > 200 {
            return Ok(sum);
        }
    }
}

/// I₁(s) = Σ (s/2)^{2m+1}/(m!(m+1)!).
pub fn bessel_i1(s: f64) -> Result<f64> {
    check_range(s)?;
    Ok(s * i1_over_s_from_q(s * s))
}

/// J₁(s): as I₁ with alternating signs.
pub fn bessel_j1(s: f64) -> Result<f64> {
    check_range(s)?;
    Ok(s * i1_over_s_from_q(-(s * s)))
}

fn check_range(s: f64) -> Result<()> {
    if !s.is_finite() || s.abs() > BESSEL_RANGE {
        return Err(Error::BesselRange(s));
    }
    Ok(())
}

fn half(v: f64) -> f64 {
    v - 0.5
}

/// Control kernel k(x, ξ) on the bowtie D = D₁ ∪ D₂ where |ξ−½| ≤ |x−½|.
pub fn control_kernel_k(x: f64, xi: f64, c1: f64, eps: f64) -> Result<f64> {
    if half(xi).abs() > half(x).abs() + 1e-12
        || !(0.0..=1.0).contains(&x)
        || !(0.0..=1.0).contains(&xi)
    {
        return Err(Error::KernelDomain { x, xi });
    }
    Ok(kernel_shifted(half(x), half(xi), c1, eps))
}

/// Inverse control kernel l(x, ξ): k with J₁ in place of I₁.
pub fn inverse_kernel_l(x: f64, xi: f64, c1: f64, eps: f64) -> Result<f64> {
    if half(xi).abs() > half(x).abs() + 1e-12
        || !(0.0..=1.0).contains(&x)
        || !(0.0..=1.0).contains(&xi)
    {
        return Err(Error::KernelDomain { x, xi });
    }
    Ok(inverse_kernel_shifted(half(x), half(xi), c1, eps))
}

/// Observer kernel P(x, ξ) on E = E₁ ∪ E₂ where |x−½| ≤ |ξ−½|.
pub fn observer_kernel_p(x: f64, xi: f64, c2: f64, eps: f64) -> Result<f64> {
    if half(x).abs() > half(xi).abs() + 1e-12
        || !(0.0..=1.0).contains(&x)
        || !(0.0..=1.0).contains(&xi)
    {
        return Err(Error::KernelDomain { x, xi });
    }
    Ok(kernel_shifted(half(xi), half(x), c2, eps))
}

/// Inverse observer kernel p̄(x, ξ): the J₁ analogue of P, certified by the
/// roundtrip checks.
pub fn observer_inverse_kernel(x: f64, xi: f64, c2: f64, eps: f64) -> Result<f64> {
    if half(x).abs() > half(xi).abs() + 1e-12
        || !(0.0..=1.0).contains(&x)
        || !(0.0..=1.0).contains(&xi)
    {
        return Err(Error::KernelDomain { x, xi });
    }
    Ok(inverse_kernel_shifted(half(xi), half(x), c2, eps))
}

/// −(c/2ε)·φ((c/ε)(z² − y²))·(z + y), the entire extension used internally.
pub(crate) fn kernel_shifted(z: f64, y: f64, c: f64, eps: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    let lam = c / eps;
    -(c / (2.0 * eps)) * i1_over_s_from_q(lam * (z * z - y * y)) * (z + y)
}

/// J₁ analogue: −(c/2ε)·φ(−(c/ε)(z² − y²))·(z + y).
pub(crate) fn inverse_kernel_shifted(z: f64, y: f64, c: f64, eps: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    let lam = c / eps;
    -(c / (2.0 * eps)) * i1_over_s_from_q(-lam * (z * z - y * y)) * (z + y)
}

/// ∂k/∂x of the control kernel, analytic via the φ series.
pub(crate) fn control_kernel_kx(x: f64, xi: f64, c1: f64, eps: f64) -> f64 {
    if c1 == 0.0 {
        return 0.0;
    }
    let lam = c1 / eps;
    let z = half(x);
    let y = half(xi);
    let q = lam * (z * z - y * y);
    let phi = i1_over_s_from_q(q);
    let dphi = i1_over_s_from_q_prime(q);
    -(c1 / (2.0 * eps)) * (dphi * 2.0 * lam * z * (z + y) + phi)
}

/// ∂P/∂ξ of the observer kernel, analytic via the φ series.
pub(crate) fn observer_kernel_p_xi(x: f64, xi: f64, c2: f64, eps: f64) -> f64 {
    if c2 == 0.0 {
        return 0.0;
    }
    let lam = c2 / eps;
    let z = half(x);
    let y = half(xi);
    let q = lam * (y * y - z * z);
    let phi = i1_over_s_from_q(q);
    let dphi = i1_over_s_from_q_prime(q);
    -(c2 / (2.0 * eps)) * (dphi * 2.0 * lam * y * (z + y) + phi)
}

/// Unilateral comparison kernel k₁(x, y) = −(c₁/ε)·x·I₁(s)/s with
/// s² = (c₁/ε)(x² − y²).
pub fn unilateral_kernel_k1(x: f64, y: f64, c1: f64, eps: f64) -> f64 {
    if c1 == 0.0 {
        return 0.0;
    }
    let lam = c1 / eps;
    -lam * x * i1_over_s_from_q(lam * (x * x - y * y))
}

/// ∂k₁/∂x of the unilateral kernel.
pub fn unilateral_kernel_k1x(x: f64, y: f64, c1: f64, eps: f64) -> f64 {
    if c1 == 0.0 {
        return 0.0;
    }
    let lam = c1 / eps;
    let q = lam * (x * x - y * y);
    -lam * (i1_over_s_from_q(q) + x * i1_over_s_from_q_prime(q) * 2.0 * lam * x)
}

/// Precomputed kernel data consumed by the feedback laws and the observer:
/// boundary derivative rows of k, the diagonal values k(0,0), k(1,1), and the
/// observer gains p₁, p₂, p₀₀, p₁₁.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub grid: Grid,
    pub c1: f64,
    pub c2: f64,
    pub eps: f64,
    /// k_x(0, ξ_j) over the grid.
    pub k_row0: Vec<f64>,
    /// k_x(1, ξ_j) over the grid.
    pub k_row1: Vec<f64>,
    /// k(0, 0) = c₁/4ε.
    pub k_diag0: f64,
    /// k(1, 1) = −c₁/4ε.
    pub k_diag1: f64,
    /// p₁(x) = −ε P_ξ(x, 1).
    pub p1: Field,
    /// p₂(x) = −ε P_ξ(x, 0).
    pub p2: Field,
    /// p₀₀ = −P(0, 0) = −c₂/4ε.
    pub p00: f64,
    /// p₁₁ = −P(1, 1) = c₂/4ε.
    pub p11: f64,
}

/// Build the kernel table for a grid and parameter set.
pub fn build_kernel_table(grid: Grid, p: &Params) -> KernelTable {
    let (c1, c2, eps) = (p.c1(), p.c2(), p.epsilon());
    let k_row0: Vec<f64> = grid
        .nodes()
        .map(|xi| control_kernel_kx(0.0, xi, c1, eps))
        .collect();
    let k_row1: Vec<f64> = grid
        .nodes()
        .map(|xi| control_kernel_kx(1.0, xi, c1, eps))
        .collect();
    let k_diag0 = kernel_shifted(-0.5, -0.5, c1, eps);
    let k_diag1 = kernel_shifted(0.5, 0.5, c1, eps);
    let p1 = Field::from_fn(grid, |x| -eps * observer_kernel_p_xi(x, 1.0, c2, eps));
    let p2 = Field::from_fn(grid, |x| -eps * observer_kernel_p_xi(x, 0.0, c2, eps));
    let p00 = -kernel_shifted(-0.5, -0.5, c2, eps);
    let p11 = -kernel_shifted(0.5, 0.5, c2, eps);
    KernelTable {
        grid,
        c1,
        c2,
        eps,
        k_row0,
        k_row1,
        k_diag0,
        k_diag1,
        p1,
        p2,
        p00,
        p11,
    }
}

/// Residual certificate of the kernel hyperbolic PDE (in shifted variables):
/// ε p_yy − ε p_zz − c·p over an interior lattice of the bowtie, plus the two
/// boundary data maxima |p(z,z) + (c/2ε)z| and |p(z,−z)|.
#[derive(Debug, Clone, Copy)]
pub struct KernelResidual {
    pub max_interior: f64,
    pub max_diag_error: f64,
    pub max_antidiag_error: f64,
}

/// Which kernel family the residual certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Control,
    Observer,
}

/// Evaluate the kernel PDE residual with 4th-order finite differences on a
/// `density × density` lattice of the shifted bowtie. The control kernel
/// satisfies the same problem with its arguments exchanged.
pub fn kernel_pde_residual(
    which: KernelKind,
    c: f64,
    eps: f64,
    density: usize,
) -> Result<KernelResidual> {
    if density < 21 {
        return Err(Error::InvalidParams(format!(
            "density must be >= 21, got {density}"
        )));
    }
    // the observer kernel p(z, y) solves ε p_yy − ε p_zz = c p; the control
    // kernel solves the same problem with its two arguments exchanged, so
    // the operator orientation flips with the kind
    let f = |z: f64, y: f64| match which {
        KernelKind::Observer => kernel_shifted(y, z, c, eps),
        KernelKind::Control => kernel_shifted(z, y, c, eps),
    };
    // 4th-order second derivative; the kernel formula is entire, so stencil
    // points may leave the bowtie
    let h = 1.0 / (density as f64 - 1.0);
    let d2 = |g: &dyn Fn(f64) -> f64, s: f64| {
        (-g(s + 2.0 * h) + 16.0 * g(s + h) - 30.0 * g(s) + 16.0 * g(s - h) - g(s - 2.0 * h))
            / (12.0 * h * h)
    };
    let mut max_interior = 0.0f64;
    for iy in 0..density {
        let y = -0.5 + iy as f64 * h;
        for iz in 0..density {
            let z = -0.5 + iz as f64 * h;
            // interior of the bowtie of each kind, one spacing from the diagonals
            let inside = match which {
                KernelKind::Observer => z.abs() < y.abs() - h + 1e-12,
                KernelKind::Control => y.abs() < z.abs() - h + 1e-12,
            };
            if !inside {
                continue;
            }
            let pyy = d2(&|s| f(z, s), y);
            let pzz = d2(&|s| f(s, y), z);
            let res = match which {
                KernelKind::Observer => eps * pyy - eps * pzz - c * f(z, y),
                KernelKind::Control => eps * pzz - eps * pyy - c * f(z, y),
            };
            max_interior = max_interior.max(res.abs());
        }
    }
    let mut max_diag_error = 0.0f64;
    let mut max_antidiag_error = 0.0f64;
    for iz in 0..density {
        let z = -0.5 + iz as f64 * h;
        max_diag_error = max_diag_error.max((f(z, z) + c / (2.0 * eps) * z).abs());
        max_antidiag_error = max_antidiag_error.max(f(z, -z).abs());
    }
    Ok(KernelResidual {
        max_interior,
        max_diag_error,
        max_antidiag_error,
    })
}

/// Dump kernel values over the grid lattice as CSV with columns
/// `x,xi,k,l,P`; cells outside a kernel's domain are left empty.
pub fn write_kernel_csv<W: Write>(grid: Grid, p: &Params, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "x,xi,k,l,P")?;
    let fmt = |v: f64| {
        let v = if v == 0.0 { 0.0 } else { v }; // normalize -0.0
        format!("{v:.12e}")
    };
    for x in grid.nodes() {
        for xi in grid.nodes() {
            let k = control_kernel_k(x, xi, p.c1(), p.epsilon())
                .map(fmt)
                .unwrap_or_default();
            let l = inverse_kernel_l(x, xi, p.c1(), p.epsilon())
                .map(fmt)
                .unwrap_or_default();
            let pp = observer_kernel_p(x, xi, p.c2(), p.epsilon())
                .map(fmt)
                .unwrap_or_default();
            writeln!(out, "{x:.12e},{xi:.12e},{k},{l},{pp}")?;
        }
    }
    Ok(())
}
