//! Bilateral boundary control and estimation for viscous Hamilton–Jacobi
//! PDEs of the form u_t = ε u_xx − a u_x (b + u_x) with Neumann actuation at
//! both ends of the unit interval.
//!
//! The toolkit covers:
//! - Hopf–Cole-type feedback-linearizing transformations and inverses
//!   ([`transforms`]);
//! - Gevrey power-series trajectory generation and feedforward boundary
//!   laws ([`trajgen`]);
//! - closed-form Bessel backstepping kernels, observer gains, and kernel
//!   PDE certification ([`kernels`], [`volterra`]);
//! - bilateral full-state, output-feedback, static collocated and
//!   unilateral boundary controllers ([`control`]);
//! - a boundary-injection observer for the transformed error ([`observer`]);
//! - a method-of-lines closed-loop simulator with traffic-density
//!   conversions ([`sim`]);
//! - numeric certification suites for roundtrips, decay rates, Gevrey
//!   bounds and norm estimates ([`verify`]).

pub mod control;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod observer;
pub mod params;
pub mod quad;
pub mod signal;
pub mod sim;
pub mod trajgen;
pub mod transforms;
pub mod verify;
pub mod volterra;

pub use error::{Error, Result};
pub use grid::{Field, Grid};
pub use params::Params;
