//! Closed-form and algebraic global densities: the square-root law of the
//! single-matrix limit, the product-ensemble algebraic laws, and the
//! hard-edge exponent formulas.
//!
//! The algebraic densities solve w^{r+2} - z w + z = 0 (subcritical) and,
//! through the substitution y = sqrt(w), y^{2r+3} - z y + z = 0 (critical
//! half-integer case), tracking the physical branch w -> 1 + 1/z from a
//! large-|z| anchor by homotopy; the density is Im(w/z)/pi just below the
//! real axis.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityRegime {
    SubcriticalFc,
    CriticalRaney,
}

#[derive(Clone, Copy, Debug)]
pub struct AlgebraicDensitySpec {
    pub regime: DensityRegime,
    pub r: usize,
}

/// Square-root law of the single rescaled matrix: support (0, 4].
pub fn marchenko_pastur(lambda: f64) -> f64 {
    if lambda <= 0.0 || lambda > 4.0 {
        return 0.0;
    }
    ((4.0 - lambda) / lambda).sqrt() / (2.0 * PI)
}

impl AlgebraicDensitySpec {
    /// Polynomial degree after the substitution.
    fn degree(&self) -> usize {
        match self.regime {
            DensityRegime::SubcriticalFc => self.r + 2,
            DensityRegime::CriticalRaney => 2 * self.r + 3,
        }
    }

    /// Right support endpoint from the vanishing discriminant of
    /// p(w) = w^d - z w + z (resp. the y-form).
    pub fn support_edge(&self) -> f64 {
        match self.regime {
            DensityRegime::SubcriticalFc => {
                let d = (self.r + 2) as f64;
                d.powf(d) / (d - 1.0).powf(d - 1.0)
            }
            DensityRegime::CriticalRaney => {
                let d = (2 * self.r + 3) as f64;
                d * (d / (d - 1.0)).powf(d - 1.0)
            }
        }
    }
}

/// p(y) = y^d - z y + z and its derivative.
fn poly(d: usize, z: Complex64, y: Complex64) -> (Complex64, Complex64) {
    let yd1 = y.powu(d as u32 - 1);
    (yd1 * y - z * y + z, (d as f64) * yd1 - z)
}

fn newton_root(d: usize, z: Complex64, start: Complex64) -> Option<Complex64> {
    let mut y = start;
    let mut prev_step = f64::INFINITY;
    for _ in 0..100 {
        let (p, dp) = poly(d, z, y);
        if dp.norm() < 1e-300 {
            return None;
        }
        let step = p / dp;
        y -= step;
        let sn = step.norm();
        if sn < 1e-13 * (1.0 + y.norm()) {
            return Some(y);
        }
        // near-degenerate roots: accept once the step hits its noise floor
        if sn < 1e-9 && sn > 0.5 * prev_step {
            return Some(y);
        }
        prev_step = sn;
    }
    None
}

fn track_leg(
    d: usize,
    mut z: Complex64,
    z_target: Complex64,
    mut y: Complex64,
) -> Result<Complex64> {
    let mut step_frac = 0.25f64;
    let mut rejects = 0usize;
    while (z - z_target).norm() > 1e-13 * z_target.norm() {
        let z_next = z + (z_target - z) * step_frac;
        match newton_root(d, z_next, y) {
            Some(y_next) if (y_next - y).norm() < 0.25 * (1.0 + y.norm()) => {
                y = y_next;
                z = z_next;
                step_frac = (step_frac * 1.5).min(1.0);
                rejects = 0;
            }
            _ => {
                step_frac *= 0.5;
                rejects += 1;
                if rejects >= 20 {
                    return Err(Error::RootTracking(format!(
                        "homotopy stalled at z = {z} heading to {z_target}"
                    )));
                }
            }
        }
    }
    Ok(y)
}

/// Tracks the physical root of y^d - z y + z = 0 from the large-|z| anchor
/// (where y -> 1) down to the target z.
///
/// The path keeps Im z = -1 while the real part descends (safely away from
/// the root collision at the support edge, which sits on the real axis) and
/// only then drops the imaginary part at fixed Re z.
fn track_root(d: usize, z_target: Complex64) -> Result<Complex64> {
    let sgn = if z_target.im > 0.0 { 1.0 } else { -1.0 };
    let anchor = Complex64::new(1e6, sgn);
    let y0 = newton_root(d, anchor, Complex64::new(1.0, 0.0))
        .ok_or_else(|| Error::RootTracking("anchor root did not converge".into()))?;
    let corner = Complex64::new(z_target.re, sgn);
    let y1 = track_leg(d, anchor, corner, y0)?;
    track_leg(d, corner, z_target, y1)
}

/// One-point density of the algebraic law at x > 0 (0 outside the support).
pub fn algebraic_density(x: f64, spec: &AlgebraicDensitySpec) -> Result<f64> {
    if x <= 0.0 || x >= spec.support_edge() {
        return Ok(0.0);
    }
    let d = spec.degree();
    let eval = |delta: f64| -> Result<f64> {
        let z = Complex64::new(x, -delta);
        let y = track_root(d, z)?;
        let w = match spec.regime {
            DensityRegime::SubcriticalFc => y,
            DensityRegime::CriticalRaney => y * y,
        };
        Ok((w / z).im / PI)
    };
    // the offset must stay well below x itself near the hard edge
    let delta = (1e-9f64).min(1e-3 * x);
    let d1 = eval(delta)?;
    let d2 = eval(delta / 2.0)?;
    Ok((2.0 * d2 - d1).max(0.0))
}

/// Hard-edge amplitude and exponent of the global density, per regime.
pub fn hard_edge_exponent(r: usize, regime: HardEdgeRegime) -> Result<(f64, f64)> {
    match regime {
        HardEdgeRegime::Subcritical => {
            let d = (r + 2) as f64;
            Ok(((PI / d).sin() / PI, -1.0 + 1.0 / d))
        }
        HardEdgeRegime::Critical => {
            let d = (2 * r + 3) as f64;
            Ok(((2.0 * PI / d).sin() / PI, -1.0 + 2.0 / d))
        }
        HardEdgeRegime::Supercritical => {
            if r == 0 {
                return Err(Error::Domain(
                    "supercritical exponent needs r >= 1".into(),
                ));
            }
            let d = (r + 1) as f64;
            Ok(((PI / d).sin() / PI, -1.0 + 1.0 / d))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HardEdgeRegime {
    Subcritical,
    Critical,
    Supercritical,
}

/// Substitution power that makes x^{expo} smooth at the hard edge.
fn edge_power(spec: &AlgebraicDensitySpec) -> i32 {
    let expo = match spec.regime {
        DensityRegime::SubcriticalFc => -1.0 + 1.0 / (spec.r as f64 + 2.0),
        DensityRegime::CriticalRaney => -1.0 + 2.0 / (2.0 * spec.r as f64 + 3.0),
    };
    (4.0 / (1.0 + expo)).ceil() as i32
}

/// Weighted Simpson integral of x^k rho(x) over the support; the map
/// x = edge sin(pi t/2)^p is smooth against both the hard-edge power and
/// the soft-edge square root.
fn density_integral(spec: &AlgebraicDensitySpec, k: u32, points: usize) -> Result<f64> {
    let edge = spec.support_edge();
    let p = edge_power(spec);
    let n = points | 1; // odd
    let h = 1.0 / (n as f64 - 1.0);
    let mut sum = 0.0;
    for j in 0..n {
        let t = j as f64 * h;
        let (s, c) = (PI * t / 2.0).sin_cos();
        let x = edge * s.powi(p);
        let dx = edge * p as f64 * s.powi(p - 1) * c * PI / 2.0;
        let f = if x <= 0.0 || j == n - 1 {
            0.0
        } else {
            x.powi(k as i32) * algebraic_density(x, spec)? * dx
        };
        let w = if j == 0 || j == n - 1 {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += w * f;
    }
    Ok(sum * h / 3.0)
}

/// Total mass of the density (normalization check).
pub fn density_mass(spec: &AlgebraicDensitySpec, points: usize) -> Result<f64> {
    density_integral(spec, 0, points)
}

/// k-th moment of the algebraic density.
pub fn density_moment(spec: &AlgebraicDensitySpec, k: u32, points: usize) -> Result<f64> {
    density_integral(spec, k, points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mp_edge_and_midpoint() {
        assert_eq!(marchenko_pastur(4.0), 0.0);
        assert!((marchenko_pastur(2.0) - 1.0 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn mp_normalization() {
        // substitute lambda = 4 sin^2(theta/2): smooth at both edges
        let n = 4_001;
        let h = PI / (n as f64 - 1.0);
        let mut sum = 0.0;
        for k in 0..n {
            let th = (k as f64 * h).max(1e-9);
            let lam = 4.0 * (th / 2.0).sin().powi(2);
            let f = marchenko_pastur(lam.clamp(1e-300, 4.0)) * 2.0 * th.sin();
            let w = if k == 0 || k == n - 1 {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            sum += w * f;
        }
        sum *= h / 3.0;
        assert!((sum - 1.0).abs() < 1e-10, "mass {sum}");
    }

    #[test]
    fn subcritical_r0_is_square_root_law() {
        let spec = AlgebraicDensitySpec { regime: DensityRegime::SubcriticalFc, r: 0 };
        assert!((spec.support_edge() - 4.0).abs() < 1e-12);
        for k in 1..=20 {
            let x = 4.0 * k as f64 / 21.0;
            let got = algebraic_density(x, &spec).unwrap();
            let expect = marchenko_pastur(x);
            assert!((got - expect).abs() < 1e-7, "x={x}: {got} vs {expect}");
        }
    }

    #[test]
    fn subcritical_r1_support_edge() {
        let spec = AlgebraicDensitySpec { regime: DensityRegime::SubcriticalFc, r: 1 };
        assert!((spec.support_edge() - 6.75).abs() < 1e-12);
        // density positive inside, zero outside
        assert!(algebraic_density(3.0, &spec).unwrap() > 0.0);
        assert_eq!(algebraic_density(7.0, &spec).unwrap(), 0.0);
    }

    #[test]
    fn critical_r0_edge_and_mean() {
        let spec = AlgebraicDensitySpec { regime: DensityRegime::CriticalRaney, r: 0 };
        assert!((spec.support_edge() - 6.75).abs() < 1e-12);
        let mass = density_mass(&spec, 4001).unwrap();
        assert!((mass - 1.0).abs() < 1e-5, "mass {mass}");
        let mean = density_moment(&spec, 1, 4001).unwrap();
        assert!((mean - 2.0).abs() < 1e-4, "mean {mean}");
    }

    #[test]
    fn densities_normalized() {
        for spec in [
            AlgebraicDensitySpec { regime: DensityRegime::SubcriticalFc, r: 1 },
            AlgebraicDensitySpec { regime: DensityRegime::SubcriticalFc, r: 2 },
            AlgebraicDensitySpec { regime: DensityRegime::CriticalRaney, r: 1 },
        ] {
            let mass = density_mass(&spec, 4001).unwrap();
            assert!((mass - 1.0).abs() < 1e-5, "{spec:?}: mass {mass}");
        }
    }

    #[test]
    fn branch_continuity_along_support() {
        let spec = AlgebraicDensitySpec { regime: DensityRegime::SubcriticalFc, r: 1 };
        let mut prev = algebraic_density(0.05, &spec).unwrap();
        let mut x = 0.05;
        while x < 6.6 {
            x += 0.05;
            let cur = algebraic_density(x, &spec).unwrap();
            assert!(
                (cur - prev).abs() < 0.35 * (1.0 + prev.abs()),
                "jump at x={x}: {prev} -> {cur}"
            );
            prev = cur;
        }
    }

    #[test]
    fn hard_edge_exponents() {
        let (a, p) = hard_edge_exponent(0, HardEdgeRegime::Subcritical).unwrap();
        assert!((a - 1.0 / PI).abs() < 1e-15);
        assert!((p + 0.5).abs() < 1e-15);
        let (a, p) = hard_edge_exponent(0, HardEdgeRegime::Critical).unwrap();
        assert!((a - (2.0 * PI / 3.0).sin() / PI).abs() < 1e-15);
        assert!((p + 1.0 / 3.0).abs() < 1e-15);
        let (a, p) = hard_edge_exponent(1, HardEdgeRegime::Supercritical).unwrap();
        assert!((a - (PI / 2.0).sin() / PI).abs() < 1e-15);
        assert!((p + 0.5).abs() < 1e-15);
        assert!(hard_edge_exponent(0, HardEdgeRegime::Supercritical).is_err());
    }

    #[test]
    fn small_x_exponent_slope_subcritical_r1() {
        // log-log slope of the density near the hard edge ~ -2/3
        let spec = AlgebraicDensitySpec { regime: DensityRegime::SubcriticalFc, r: 1 };
        let xs: [f64; 4] = [1e-6, 1e-5, 1e-4, 1e-3];
        let mut pts = Vec::new();
        for &x in &xs {
            pts.push((x.ln(), algebraic_density(x, &spec).unwrap().ln()));
        }
        // least squares slope
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!((slope + 2.0 / 3.0).abs() < 0.03, "slope {slope}");
        // and the amplitude matches (1/pi) sin(pi/3)
        let (amp, expo) = hard_edge_exponent(1, HardEdgeRegime::Subcritical).unwrap();
        let x = 1e-5;
        let got = algebraic_density(x, &spec).unwrap();
        let expect = amp * x.powf(expo);
        assert!((got / expect - 1.0).abs() < 0.01, "{got} vs {expect}");
    }
}
