//! Solvers for the Hunter-Saxton equation
//!
//! ```text
//! u_t + u u_x - ∫_{-L}^{x} ½ u_x² dx = 0,   x ∈ (-L, L),   u(-L) = u_x(L) = 0
//! ```
//!
//! on a bounded interval. Three energy-preserving discretizations are provided:
//!
//! - a finite difference scheme on uniform grids with ghost-point boundary
//!   conditions ([`fd_scheme`]),
//! - a P1 Galerkin scheme with an auxiliary `q ≈ u_xx` ([`schemes::Galerkin1`]),
//! - a P1 Galerkin scheme with an auxiliary `r ≈ u_x` ([`schemes::Galerkin2`]),
//!
//! all of which use the implicit midpoint rule in time and conserve the
//! discrete counterpart of `H1 = ∫ ½ u_x² dx` up to the nonlinear solver
//! tolerance. Explicit and implicit Euler integrators sharing the first
//! Galerkin discretization are included as non-conservative references.

pub mod banded;
pub mod error;
pub mod fd_scheme;
pub mod fem;
pub mod mesh;
pub mod newton;
pub mod quadrature;
pub mod reference;
pub mod schemes;

pub use error::{Error, Result};
pub use mesh::Mesh;
pub use newton::NewtonSettings;
pub use reference::ExactSolution;
pub use schemes::{run, SchemeConfig, SchemeKind, Trajectory};
