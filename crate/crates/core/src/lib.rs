//! Numerical laboratory for the squared singular values of random matrix
//! products with an additive source.
//!
//! The crate evaluates the finite-N determinantal correlation kernel of such
//! products by double contour quadrature, all hard-edge limit kernels across
//! the subcritical/critical/supercritical transition, averages of
//! characteristic polynomials, Fredholm-determinant gap probabilities, and
//! the closed-form and algebraic global densities, and cross-validates all
//! of it against direct Monte Carlo sampling of the matrix ensembles.

pub mod charpoly;
pub mod contour;
pub mod dd;
pub mod density;
pub mod error;
pub mod kernel_finite;
pub mod kernel_limits;
pub mod montecarlo;
pub mod specfun;

pub use contour::{ContourSpec, KernelResult};
pub use error::{Error, Result};
pub use kernel_finite::{EnsembleKind, EnsembleSpec};
pub use kernel_limits::{LimitFamily, LimitKernelSpec};
pub use num_complex::Complex64;
