//! Diophantine frequency tuples, exact lattice random walks and the excursion
//! variance of Gaussian fields with atomic spectral measure.
//!
//! The crate is `no_std` with `alloc`. IO, the command line and file formats
//! live in the companion `diolab` crate.
//!
//! Modules:
//! - [`real`]: frequency descriptors and exact surd arithmetic;
//! - [`dioph`]: continued fractions, approximation sets, certificates, witnesses;
//! - [`walk`]: the symmetric lattice walk on `Z^M` and its recurrence statistics;
//! - [`spectral`]: the spectral measure, arcsine coefficients, window transform,
//!   variance series and structure factor;
//! - [`mcfield`]: Monte Carlo sampling of the finite-rank field;
//! - [`numeric`]: special functions, quadrature and regression helpers.
#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` guards reject NaN on purpose; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dioph;
mod error;
pub mod mcfield;
pub mod numeric;
pub mod real;
pub mod spectral;
pub mod walk;

pub use error::{Error, Result};
