//! Confluent and generalized hypergeometric functions and Laguerre
//! polynomials.
//!
//! All series run in double-double arithmetic: the kernels evaluate these
//! functions at large oscillatory arguments where an f64 accumulator would
//! lose most digits to cancellation.

use crate::dd::{Dd, DdC};
use crate::error::{Error, Result};
use crate::specfun::gamma::{ln_gamma_real_pos, log_gamma};
use num_complex::Complex64;

fn near_nonpositive_integer(x: f64) -> bool {
    x <= 1e-12 && (x - x.round()).abs() < 1e-12
}

const MAX_TERMS: usize = 6000;

/// 0F1(c; z), entire in z, by adaptive double-double series; very large
/// negative real arguments reduce to the Bessel function, where the series
/// cancellation would exceed even the double-double budget.
pub fn hyp0f1(c: f64, z: Complex64) -> Result<Complex64> {
    if near_nonpositive_integer(c) {
        return Err(Error::ParameterPole(format!("0F1 lower parameter c = {c}")));
    }
    if z.im == 0.0 && z.re < -900.0 && c > 0.0 {
        // 0F1(c; -t) = Gamma(c) t^{-(c-1)/2} J_{c-1}(2 sqrt t)
        let t = -z.re;
        let j = crate::specfun::bessel::bessel_j(c - 1.0, 2.0 * t.sqrt())?;
        let lg = ln_gamma_real_pos(c) - 0.5 * (c - 1.0) * t.ln();
        return Ok(Complex64::new(lg.exp() * j, 0.0));
    }
    let zd = DdC::from(z);
    let mut term = DdC::ONE;
    let mut sum = DdC::ONE;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term = term.mul(zd).div_f64((kf + 1.0) * (c + kf));
        sum = sum.add(term);
        if term.norm() < 1e-17 * sum.norm().max(1e-300) && k as f64 > z.norm().sqrt() {
            return Ok(sum.to_c64());
        }
    }
    Err(Error::Nonconvergence { estimate: sum.to_c64(), err: term.norm() })
}

/// 0Fq(b_1..b_q; z) by adaptive double-double series, relative tail < 1e-15.
pub fn hyp0fq(bs: &[f64], z: Complex64) -> Result<Complex64> {
    for &b in bs {
        if near_nonpositive_integer(b) {
            return Err(Error::ParameterPole(format!("0Fq lower parameter b = {b}")));
        }
    }
    let zd = DdC::from(z);
    let mut term = DdC::ONE;
    let mut sum = DdC::ONE;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let mut denom = kf + 1.0;
        for &b in bs {
            denom *= b + kf;
        }
        term = term.mul(zd).div_f64(denom);
        sum = sum.add(term);
        let scale = sum.norm().max(1e-300);
        if term.norm() < 1e-16 * scale && kf > z.norm().powf(1.0 / (bs.len() as f64 + 1.0)) {
            return Ok(sum.to_c64());
        }
    }
    Err(Error::Nonconvergence { estimate: sum.to_c64(), err: term.norm() })
}

/// Kummer 1F1(a; b; z) for complex a and z, real b.
///
/// Series (double-double) inside `ASYMPTOTIC_SWITCH` or whenever the large-z
/// expansion is not applicable; the two-branch asymptotic expansion beyond.
pub const ASYMPTOTIC_SWITCH: f64 = 30.0;

pub fn hyp1f1(a: Complex64, b: f64, z: Complex64) -> Result<Complex64> {
    Ok(hyp1f1_ext(a, b, z)?.0)
}

/// As `hyp1f1`, additionally reporting the estimated relative precision loss;
/// the flag threshold from the contract is `loss > 1e-4`.
pub fn hyp1f1_ext(a: Complex64, b: f64, z: Complex64) -> Result<(Complex64, f64)> {
    if near_nonpositive_integer(b) {
        return Err(Error::ParameterPole(format!("1F1 lower parameter b = {b}")));
    }
    let r = z.norm();
    if r > ASYMPTOTIC_SWITCH && a.norm_sqr() < 0.5 * r {
        let v = kummer_asymptotic(a, b, z)?;
        return Ok((v, 1e-15));
    }
    series_1f1(a, b, z)
}

fn series_1f1(a: Complex64, b: f64, z: Complex64) -> Result<(Complex64, f64)> {
    let zd = DdC::from(z);
    let ad = DdC::from(a);
    let mut term = DdC::ONE;
    let mut sum = DdC::ONE;
    let mut max_mag = 1.0f64;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term = term.mul(ad.add(DdC { re: Dd::from(kf), im: Dd::ZERO })).mul(zd)
            .div_f64((b + kf) * (kf + 1.0));
        sum = sum.add(term);
        max_mag = max_mag.max(term.norm());
        let scale = sum.norm().max(1e-300);
        if term.norm() < 1e-17 * scale && kf > z.norm().sqrt() {
            // double-double carries ~31 digits; remaining loss after
            // cancellation of max_mag down to |sum|
            let loss = 1e-31 * max_mag / scale;
            return Ok((sum.to_c64(), loss));
        }
    }
    Err(Error::Nonconvergence { estimate: sum.to_c64(), err: term.norm() })
}

/// Large-|z| expansion of 1F1 (two branches):
///   1F1(a;b;z) ~ Gamma(b) [ (-z)^{-a}/Gamma(b-a) * S1 + e^z z^{a-b}/Gamma(a) * S2 ]
/// with S1 = sum (a)_k (a-b+1)_k / (k! (-z)^k), S2 = sum (b-a)_k (1-a)_k / (k! z^k).
fn kummer_asymptotic(a: Complex64, b: f64, z: Complex64) -> Result<Complex64> {
    let bb = Complex64::new(b, 0.0);
    let log_gb = log_gamma(bb)?;

    let asymptotic_sum = |p: Complex64, q: Complex64, x: Complex64| -> Complex64 {
        // sum_k (p)_k (q)_k / (k! x^k), truncated at the smallest term
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        let mut prev = f64::INFINITY;
        for k in 0..60 {
            let kf = k as f64;
            term = term * (p + kf) * (q + kf) / ((kf + 1.0) * x);
            if term.norm() > prev {
                break;
            }
            prev = term.norm();
            sum += term;
            if term.norm() < 1e-17 * sum.norm() {
                break;
            }
        }
        sum
    };

    // branch 1: (-z)^{-a} / Gamma(b-a), with (-z) = z e^{-+ i pi}
    let minus_z = -z;
    let s1 = asymptotic_sum(a, a - b + 1.0, minus_z);
    let t1 = match log_gamma(bb - a) {
        Ok(lg) => (log_gb - lg - a * minus_z.ln()).exp() * s1,
        Err(_) => Complex64::new(0.0, 0.0), // 1/Gamma at a pole
    };

    // branch 2: e^z z^{a-b} / Gamma(a)
    let s2 = asymptotic_sum(bb - a, 1.0 - a, z);
    let t2 = match log_gamma(a) {
        Ok(lg) => (log_gb - lg + z + (a - bb) * z.ln()).exp() * s2,
        Err(_) => Complex64::new(0.0, 0.0),
    };

    Ok(t1 + t2)
}

/// Generalized Laguerre polynomial L_n^{nu}(x) by three-term recurrence.
pub fn laguerre(n: usize, nu: f64, x: Complex64) -> Complex64 {
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut lm1 = Complex64::new(1.0, 0.0);
    let mut l = nu + 1.0 - x;
    for k in 1..n {
        let kf = k as f64;
        let lp1 = ((2.0 * kf + nu + 1.0 - x) * l - (kf + nu) * lm1) / (kf + 1.0);
        lm1 = l;
        l = lp1;
    }
    l
}

/// G^{1,0}-type series: prod_l 1/Gamma(nu_l + 1) * 0F_{r+1}(nu_0+1,..,nu_r+1; -z).
///
/// This is the exact hypergeometric reduction of the first kernel factor,
/// used on hot paths where the contour evaluation would be ill-conditioned.
pub fn g10_series(nus: &[f64], z: Complex64) -> Result<Complex64> {
    let bs: Vec<f64> = nus.iter().map(|&v| v + 1.0).collect();
    let f = hyp0fq(&bs, -z)?;
    let mut log_pre = 0.0;
    for &nu in nus {
        log_pre -= ln_gamma_real_pos(nu + 1.0);
    }
    Ok(f * log_pre.exp())
}

/// Scaled series for G^{1,q}_{q,r+2} with upper parameters (-mu_1..-mu_q) and
/// lower (0, -nu_0..-nu_r): value = result * exp(log_scale).
///
/// Residue form: sum_k (-1)^k/k! * prod_j Gamma(1+mu_j+k) * z^k / prod_l Gamma(1+nu_l+k),
/// rewritten with the mu Gamma factors peeled into the scale so large mu stays finite.
pub fn g1q_series_scaled(mus: &[f64], nus: &[f64], z: Complex64) -> Result<(Complex64, f64)> {
    let mut log_scale = 0.0;
    for &mu in mus {
        log_scale += ln_gamma_real_pos(1.0 + mu);
    }
    let zd = DdC::from(z);
    let mut pre = Dd::ONE;
    for &nu in nus {
        pre = pre.div_f64(ln_gamma_real_pos(1.0 + nu).exp());
    }
    let mut term = DdC { re: pre, im: Dd::ZERO };
    let mut sum = term;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let mut ratio = 1.0 / (kf + 1.0);
        for &mu in mus {
            ratio *= 1.0 + mu + kf;
        }
        let mut denom = 1.0;
        for &nu in nus {
            denom *= 1.0 + nu + kf;
        }
        term = term.mul(zd).mul_dd(Dd::from(-ratio).div_f64(denom));
        sum = sum.add(term);
        if term.norm() < 1e-17 * sum.norm().max(1e-300) && kf > z.norm().sqrt() {
            return Ok((sum.to_c64(), log_scale));
        }
    }
    Err(Error::Nonconvergence { estimate: sum.to_c64(), err: term.norm() })
}

/// Pochhammer (x)_n for real x.
pub fn pochhammer(x: f64, n: usize) -> f64 {
    let mut p = 1.0;
    for k in 0..n {
        p *= x + k as f64;
    }
    p
}

/// Binomial coefficient with real upper argument, binom(a, k).
pub fn binom_real(a: f64, k: usize) -> f64 {
    let mut p = 1.0;
    for j in 0..k {
        p *= (a - j as f64) / (k - j) as f64;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel::bessel_j;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // ---- oracles ----

    // 100-term 0F1 oracle with Kahan-compensated f64 summation
    fn hyp0f1_oracle(cparam: f64, z: Complex64) -> Complex64 {
        let mut sum = c(1.0, 0.0);
        let mut comp = c(0.0, 0.0);
        let mut term = c(1.0, 0.0);
        for k in 0..100 {
            let kf = k as f64;
            term = term * z / ((kf + 1.0) * (cparam + kf));
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum
    }

    // 200-term 0Fq oracle
    fn hyp0fq_oracle(bs: &[f64], z: Complex64) -> Complex64 {
        let mut sum = c(1.0, 0.0);
        let mut term = c(1.0, 0.0);
        for k in 0..200 {
            let kf = k as f64;
            let mut denom = kf + 1.0;
            for &b in bs {
                denom *= b + kf;
            }
            term = term * z / denom;
            sum += term;
        }
        sum
    }

    #[test]
    fn hyp0f1_at_zero_is_one() {
        assert_eq!(hyp0f1(2.5, c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn hyp0f1_bessel_reduction() {
        // 0F1(nu+1; -x) = Gamma(nu+1) x^{-nu/2} J_nu(2 sqrt(x)) at nu=0, x=1
        let lhs = hyp0f1(1.0, c(-1.0, 0.0)).unwrap();
        let rhs = bessel_j(0.0, 2.0).unwrap();
        assert!((lhs.re - rhs).abs() < 1e-13, "{lhs} vs {rhs}");
    }

    #[test]
    fn hyp0f1_complex_against_series_oracle() {
        let z = c(1.0, 1.0);
        let got = hyp0f1(2.0, z).unwrap();
        let expect = hyp0f1_oracle(2.0, z);
        assert!((got - expect).norm() < 1e-12 * expect.norm());
    }

    #[test]
    fn hyp0f1_large_negative_argument() {
        // deep in the cancellation regime: check against the Bessel route
        let x = 300.0f64;
        let got = hyp0f1(1.0, c(-x, 0.0)).unwrap();
        let expect = bessel_j(0.0, 2.0 * x.sqrt()).unwrap();
        assert!(
            (got.re - expect).abs() < 1e-11 * (1.0 + expect.abs()),
            "{} vs {}",
            got.re,
            expect
        );
    }

    #[test]
    fn hyp0fq_trivials() {
        assert_eq!(hyp0fq(&[1.0, 2.0], c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        // single-b collapse to 0F1 at b=1, z=-1
        let a = hyp0fq(&[1.0], c(-1.0, 0.0)).unwrap();
        let b = hyp0f1(1.0, c(-1.0, 0.0)).unwrap();
        assert!((a - b).norm() < 1e-15);
    }

    #[test]
    fn hyp0fq_against_series_oracle() {
        let got = hyp0fq(&[1.0, 2.0], c(-2.0, 0.0)).unwrap();
        let expect = hyp0fq_oracle(&[1.0, 2.0], c(-2.0, 0.0));
        assert!((got - expect).norm() < 1e-13 * expect.norm());
    }

    #[test]
    fn hyp1f1_trivials() {
        assert_eq!(hyp1f1(c(2.0, 0.5), 3.0, c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        // (b, b, z) -> e^z at z = 1
        let got = hyp1f1(c(3.0, 0.0), 3.0, c(1.0, 0.0)).unwrap();
        assert!((got.re - 1.0f64.exp()).abs() < 1e-13);
    }

    #[test]
    fn hyp1f1_kummer_transform() {
        // 1F1(2;3;-1) = e^{-1} 1F1(1;3;1)
        let lhs = hyp1f1(c(2.0, 0.0), 3.0, c(-1.0, 0.0)).unwrap();
        let rhs = (-1.0f64).exp() * hyp1f1(c(1.0, 0.0), 3.0, c(1.0, 0.0)).unwrap();
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn hyp1f1_asymptotic_agrees_with_series_at_switch() {
        // invariant: both branches agree at |z| = switch to 1e-7 relative
        for &(a, b) in &[(c(1.5, 0.3), 2.5), (c(0.7, -1.0), 1.0), (c(2.0, 0.0), 4.0)] {
            for &arg in &[0.0, 1.0, 2.2, 3.14, 4.4, -1.9] {
                let z = Complex64::from_polar(ASYMPTOTIC_SWITCH, arg);
                let (ser, _) = series_1f1(a, b, z).unwrap();
                let asym = kummer_asymptotic(a, b, z).unwrap();
                assert!(
                    (ser - asym).norm() < 1e-7 * ser.norm(),
                    "a={a} b={b} z={z}: {ser} vs {asym}"
                );
            }
        }
    }

    #[test]
    fn hyp1f1_large_imaginary_parameter_series() {
        // the regime the Mellin-Barnes lines hit: |a| ~ |z|, dd series only;
        // sanity via the derivative-free Kummer transform
        let a = c(1.0, 20.0);
        let b = 2.0;
        let z = c(45.0, 0.0);
        let lhs = hyp1f1(a, b, z).unwrap();
        let rhs = z.exp() * hyp1f1(c(b, 0.0) - a, b, -z).unwrap();
        assert!((lhs - rhs).norm() < 1e-9 * lhs.norm(), "{lhs} vs {rhs}");
    }

    #[test]
    fn laguerre_trivials() {
        assert_eq!(laguerre(0, 1.3, c(4.0, 0.0)), c(1.0, 0.0));
        // L_1^0(1) = 0 + 1 - 1 = 0
        assert!(laguerre(1, 0.0, c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn laguerre_explicit_sum_oracle() {
        // L_n^nu(x) = sum_k binom(n+nu, n-k) (-x)^k / k!
        let (n, nu, x) = (5usize, 2.0, 3.7f64);
        let mut expect = 0.0;
        let mut fact = 1.0;
        for k in 0..=n {
            if k > 0 {
                fact *= k as f64;
            }
            expect += binom_real(n as f64 + nu, n - k) * (-x).powi(k as i32) / fact;
        }
        let got = laguerre(n, nu, c(x, 0.0));
        assert!((got.re - expect).abs() < 1e-12 * expect.abs(), "{} vs {}", got.re, expect);
    }

    #[test]
    fn laguerre_leading_coefficient_is_monic_up_to_factorial() {
        // n! L_n^nu(x) = (-x)^n + lower order: check via large x
        let n = 6usize;
        let nu = 1.5;
        let x = 1e7;
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        let got = laguerre(n, nu, c(x, 0.0)).re * fact;
        let lead = (-x).powi(n as i32);
        assert!(((got - lead) / lead).abs() < 1e-5);
    }

    #[test]
    fn g10_series_is_scaled_0fq() {
        let nus = [0.0, 1.0];
        let z = c(0.5, 0.0);
        let got = g10_series(&nus, z).unwrap();
        let expect = hyp0fq(&[1.0, 2.0], -z).unwrap() / (1.0 * 1.0);
        assert!((got - expect).norm() < 1e-13 * expect.norm());
    }

    #[test]
    fn g1q_series_reduces_at_q0() {
        let nus = [0.3, 1.2];
        let z = c(2.0, 0.5);
        let (v, ls) = g1q_series_scaled(&[], &nus, z).unwrap();
        assert_eq!(ls, 0.0);
        let expect = g10_series(&nus, z).unwrap();
        assert!((v - expect).norm() < 1e-13 * expect.norm());
    }
}
