//! Command-line driver pieces for the MHD solver: config-file parsing, the
//! ASCII snapshot and diagnostics formats, the vortex convergence harness,
//! and the fast invariant suite behind `ppct check`.

// Same numeric-validation and axis-loop idioms as the core crate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]
#![allow(clippy::manual_is_multiple_of)]

pub mod check;
pub mod config;
pub mod convergence;
pub mod output;
pub mod rng;
