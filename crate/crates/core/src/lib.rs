//! A hybrid finite-volume / finite-difference solver for the 2D and 3D ideal
//! compressible MHD equations on uniform, non-staggered Cartesian grids.
//!
//! The MHD system is advanced by Strang splitting between two subsystems:
//!
//! * an Euler subsystem with a frozen magnetic field, solved by a MUSCL-type
//!   finite volume method ([`euler_fv`]) whose slope limiter provably keeps
//!   density and pressure positive under a mild CFL condition, and
//! * a magnetic subsystem with frozen density and internal energy, solved by
//!   an implicit finite-difference constrained transport method ([`ct_fd`])
//!   that preserves a zero central-difference divergence of the magnetic
//!   field exactly and conserves total energy on periodic domains.
//!
//! The [`splitting`] module holds the time-stepping driver, [`problems`] the
//! benchmark library (isentropic vortex, Orszag-Tang, rotor, blast,
//! shock-cloud, MHD Sedov, astrophysical jets), and [`diagnostics`] the
//! conservation / positivity / divergence reductions used to monitor runs.

// Validation deliberately uses `!(x > 0.0)` so NaN fails closed, and stencil
// loops index several parallel per-axis arrays by the axis number.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod ct_fd;
pub mod diagnostics;
pub mod error;
pub mod euler_fv;
pub mod grid;
pub mod problems;
pub mod splitting;
pub mod state;
pub mod vec3;

pub use error::{MhdError, Result};
pub use grid::{apply_boundaries, BoundarySpec, FaceCondition, FieldGrid, GridGeometry};
pub use state::{CellState, EulerState, GasModel, PrimitiveState};
pub use vec3::Vec3;
