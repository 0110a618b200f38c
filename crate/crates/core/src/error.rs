//! Crate-wide error type.

use num_complex::Complex64;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("gamma pole at non-positive integer z = {z}")]
    GammaPole { z: Complex64 },

    #[error("parameter pole: {0}")]
    ParameterPole(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature failed to converge (best {estimate}, err {err:.3e})")]
    Nonconvergence { estimate: Complex64, err: f64 },

    #[error("max refinement depth exceeded (best {estimate}, err {err:.3e})")]
    MaxRefinement { estimate: Complex64, err: f64 },

    #[error("no admissible contour: {0}")]
    ContourConflict(String),

    #[error("ill-conditioned matrix (cond ~ {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error("spec shape error: {0}")]
    SpecShape(String),

    #[error("result unstable under epsilon halving (shift {shift:.3e} vs err {err:.3e})")]
    EpsUnstable { shift: f64, err: f64 },

    #[error("sampling requires integer nu parameters (matrix dimensions)")]
    NonIntegerNu,

    #[error("overflow: |log10 result| ~ {exponent:.1} exceeds 600")]
    Overflow { exponent: f64 },

    #[error("root tracking failed: {0}")]
    RootTracking(String),

    #[error("empty support for histogram")]
    EmptySupport,

    #[error("negative Fredholm determinant ({0:.3e}); kernel evaluation suspect")]
    NegativeDeterminant(f64),

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
