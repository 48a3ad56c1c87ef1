//! Finite-volume BGK kinetic solver on periodic uniform grids.
//!
//! The solver advances discrete-velocity distribution functions with a
//! finite-volume update whose interface fluxes come from a characteristic
//! half-step that keeps the collision term active during transport (the
//! DUGKS construction). A collisionless reconstruction variant and a pure
//! Lax-Wendroff transport variant are provided for comparison; the
//! [`benchmarks`] and [`harness`] modules drive decaying Taylor-vortex
//! experiments that measure accuracy and convergence order across
//! relaxation regimes.

// Validation uses `!(x > 0.0)` on purpose: unlike `x <= 0.0` it also
// rejects NaN. Moment kernels index several arrays in lockstep, where
// zip/enumerate chains obscure the arithmetic.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod benchmarks;
pub mod error;
pub mod grid;
pub mod harness;
pub mod kinetics;
pub mod scheme;
pub mod velocity_set;

pub use error::{Error, Result};
