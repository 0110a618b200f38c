//! Self-contained complex special functions: Gamma, Bessel J, confluent and
//! generalized hypergeometric functions, Laguerre polynomials, and the
//! Meijer G families the correlation kernels are built from.

mod bessel;
mod gamma;
mod hyper;
mod meijer;

pub use bessel::bessel_j;
pub use gamma::{complex_gamma, gamma_real, ln_gamma_real_pos, log_gamma, log_sin_pi};
pub use hyper::{
    binom_real, g10_series, g1q_series_scaled, hyp0f1, hyp0fq, hyp1f1, hyp1f1_ext, laguerre,
    pochhammer, ASYMPTOTIC_SWITCH,
};
pub use meijer::{meijer_g, MeijerGSpec};
