//! Numerical toolkit for maximal averages over finite-type curves and
//! surfaces under non-isotropic dilations.
//!
//! The crate is organized by subsystem:
//!
//! - [`delta_grid`]: dilations, δ-cubes, shifted dyadic grids.
//! - [`geometry`]: curve and surface families, cutoffs, Fourier transforms
//!   of the carried measures.
//! - [`averaging`]: grid functions, averaging operators, maximal functions
//!   and norm measurements.
//! - [`regions`]: exact exponent regions and their comparison.
//! - [`sparse`]: stopping-time sparse selection, Calderón–Zygmund
//!   decomposition and sparse forms.
//! - [`weights`]: Muckenhoupt and reverse Hölder characteristics.
//! - [`counterexamples`]: the five scaling families and their slope fits.

pub mod averaging;
pub mod counterexamples;
pub mod delta_grid;
pub mod error;
pub mod exec;
pub mod fit;
pub mod geometry;
pub mod regions;
pub mod sparse;
pub mod weights;

pub use error::{Error, Result};
pub use exec::Execution;
