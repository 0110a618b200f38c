//! Bessel function of the first kind for real order nu > -1, real x >= 0.
//!
//! Power series (double-double accumulation) for moderate arguments, Hankel
//! asymptotic expansion beyond. The double-double series keeps the classic
//! cancellation of the alternating series under control through the
//! crossover region.

use crate::error::{Error, Result};
use crate::specfun::gamma::ln_gamma_real_pos;
use crate::specfun::hyper::hyp0f1;
use num_complex::Complex64;
use std::f64::consts::PI;

const SERIES_CUTOFF: f64 = 18.0;

/// J_nu(x) with relative accuracy ~1e-12 for x <= 200.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::Domain(format!("bessel_j needs x >= 0, got {x}")));
    }
    if nu <= -1.0 {
        return Err(Error::Domain(format!("bessel_j needs nu > -1, got {nu}")));
    }
    if x == 0.0 {
        if nu == 0.0 {
            return Ok(1.0);
        }
        if nu > 0.0 {
            return Ok(0.0);
        }
        return Err(Error::Domain("J_nu(0) diverges for nu < 0".into()));
    }
    if x <= SERIES_CUTOFF.max(1.2 * nu.abs()) && x <= 60.0 {
        series(nu, x)
    } else {
        Ok(hankel_asymptotic(nu, x))
    }
}

fn series(nu: f64, x: f64) -> Result<f64> {
    // J_nu(x) = (x/2)^nu / Gamma(nu+1) * 0F1(nu+1; -x^2/4)
    let f = hyp0f1(nu + 1.0, Complex64::new(-x * x / 4.0, 0.0))?;
    let log_pre = nu * (x / 2.0).ln() - ln_gamma_real_pos(nu + 1.0);
    Ok(log_pre.exp() * f.re)
}

fn hankel_asymptotic(nu: f64, x: f64) -> f64 {
    // DLMF 10.17: J_nu(x) ~ sqrt(2/(pi x)) [cos w * P - sin w * Q],
    // a_k = prod_{j<=k} (4 nu^2 - (2j-1)^2) / (8 j x)
    let mu = 4.0 * nu * nu;
    let w = x - (0.5 * nu + 0.25) * PI;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..40 {
        let kf = k as f64;
        a *= (mu - (2.0 * kf - 1.0) * (2.0 * kf - 1.0)) / (8.0 * kf * x);
        if a.abs() > prev {
            break; // divergent tail reached, stop at the smallest term
        }
        prev = a.abs();
        let signed = if (k / 2) % 2 == 0 { a } else { -a };
        if k % 2 == 0 {
            p += signed;
        } else {
            q += signed;
        }
        if a.abs() < 1e-18 {
            break;
        }
    }
    (2.0 / (PI * x)).sqrt() * (w.cos() * p - w.sin() * q)
}
