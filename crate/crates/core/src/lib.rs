//! Weighted logarithmic potential theory on planar rectangles.
//!
//! The crate computes weighted Vandermonde determinants in the log domain,
//! weighted Fekete sets and transfinite diameters, equilibrium measures of
//! the weighted logarithmic energy, free entropy, and Monte Carlo estimates
//! of Vandermonde volume integrals restricted to moment neighborhoods of a
//! reference measure.
//!
//! Module map:
//!
//! - [`measures`]: rectangles, configurations, grid measures, moments and
//!   moment neighborhoods, empirical measures, perturbation boxes.
//! - [`vdm`]: weights, log-domain (weighted) Vandermonde determinants and
//!   their gradients, Markov-inequality constants.
//! - [`fekete`]: weighted Fekete sets, transfinite diameter tables, and the
//!   moment-constrained supremum.
//! - [`equilibrium`]: free entropy, weighted energy, the discretized
//!   equilibrium problem and the large-deviation rate functional.
//! - [`montecarlo`]: base measures, log partition functions, constrained
//!   volumes and probabilities, Bernstein–Markov ratios.
//! - [`verify`]: named check suites with pass/fail reports.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod equilibrium;
pub mod error;
pub mod fekete;
pub mod measures;
pub mod montecarlo;
pub mod quadrature;
pub mod rng;
pub mod vdm;
pub mod verify;

pub use error::{Error, Result};
pub use measures::{Configuration, GridMeasure, MomentNeighborhood, Moments, Rectangle};
pub use num_complex::Complex64;
pub use vdm::WeightFunction;

/// Library version recorded in serialized outputs.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
