//! Simulator for rf-dressed, state-dependent optical lattices of Rb-87 in
//! the F = 1 manifold: Breit–Rabi structure, lattice potentials, adiabatic
//! surfaces and gaps, spinor Bloch bands, time-of-flight widths,
//! nonadiabatic loss estimates and the exponential-law fitting harness.
//!
//! Internally every quantity is in recoil units (E_R, 1/k, ħ/E_R); see
//! [`constants::UnitSystem`] for conversions.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bloch;
pub mod constants;
pub mod dressing;
pub mod error;
pub mod fit;
pub mod lattice;
pub mod linalg;
pub mod loss;
pub mod momentum;
pub mod sweep;
pub mod topology;
pub mod zeeman;

pub use error::{Error, Result};
