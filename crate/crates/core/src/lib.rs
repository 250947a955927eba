//! Radial simulator and variational toolkit for the focusing quintic NLS
//! with a defocusing cubic perturbation,
//! `i u_t + Δu = -|u|^4 u + |u|^2 u` in three dimensions.

// `!(x < y)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diagnostics;
pub mod dichotomy;
pub mod error;
pub mod evolve;
pub mod functionals;
pub mod grid;
pub mod ground_state;
pub mod littlewood_paley;
pub mod profile;
pub mod quadrature;
pub mod transform;
pub mod variational;
pub mod virial;

pub use error::{Error, Result};
pub use functionals::{functional_report, FunctionalReport, Norms};
pub use grid::{integrate, make_grid, sample, scale_field, RadialField, RadialGrid};
pub use num_complex::Complex64;
pub use profile::{AnalyticProfile, Shape};
