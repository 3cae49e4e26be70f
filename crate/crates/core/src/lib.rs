//! Lagrange-Galerkin finite element schemes for the pure advection equation
//! `c_t + u . grad c = 0` on triangulated rectangles.
//!
//! Three time-marching schemes share one discretization core:
//!
//! * conventional LG: `c^n = P_h (c^{n-1} o X)`, an L2 projection of the
//!   solution transported along the characteristic feet;
//! * LPS-LG: the same projection plus a local projection stabilization
//!   `dt * S_h(c^n, v)` acting on the gradient fluctuations `grad c - pi_M grad c`;
//! * DC-LG: a nonlinear residual-driven element viscosity solved by Picard
//!   iteration.
//!
//! The transported integrals are evaluated with symmetric triangle quadrature
//! rules on the destination mesh, which is exactly where the stability of the
//! method depends on the quadrature order.

pub mod characteristics;
pub mod dc;
pub mod diagnostics;
pub mod elements;
mod error;
pub mod mesh;
pub mod problems;
pub mod run;
pub mod space;
pub mod sparse;
pub mod stabilization;
pub mod transport;

pub use error::{Error, Result};
