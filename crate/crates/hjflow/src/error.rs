//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by grid construction, transforms, trajectory generation,
/// kernel evaluation and simulation.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("grid must have at least {min} nodes, got {got}")]
    GridTooSmall { min: usize, got: usize },

    #[error("field length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("fields live on different grids ({0} vs {1} nodes)")]
    GridMismatch(usize, usize),

    #[error("non-finite sample at node {node}")]
    NonFinite { node: usize },

    #[error("exponent overflow at node {node}: |{exponent}| > 700")]
    Overflow { node: usize, exponent: f64 },

    #[error("feasibility violation at node {node}: log argument {value} <= margin")]
    Feasibility { node: usize, value: f64 },

    #[error("reference infeasible: {0}")]
    ReferenceInfeasible(String),

    #[error("kernel argument ({x}, {xi}) outside its domain")]
    KernelDomain { x: f64, xi: f64 },

    #[error("bessel argument {0} outside supported range |s| <= 50")]
    BesselRange(f64),

    #[error(
        "series truncation failed: last term {last_term:.3e} >= tolerance {tol:.3e} at k = {k}"
    )]
    Truncation { last_term: f64, tol: f64, k: usize },

    #[error("explicit scheme violates the CFL rule: dt = {dt:.3e} > {limit:.3e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("solution diverged at t = {t}: sup norm {sup:.3e}")]
    Divergence { t: f64, sup: f64 },

    #[error("feasibility region exit at t = {t}: {detail}")]
    FeasibilityExit { t: f64, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
