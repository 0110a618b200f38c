//! Minimal double-double arithmetic.
//!
//! Several series in this crate (Bessel-type `0F1`, `0Fq`, Kummer `1F1`)
//! suffer catastrophic cancellation long before their terms overflow.
//! Summing the terms with ~32 significant digits removes the problem for
//! every argument range the kernels reach. Only the handful of operations
//! the series recurrences need are implemented.

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const SPLIT: f64 = 134_217_729.0; // 2^27 + 1, Dekker splitting constant

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    let c = SPLIT * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let err = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn add_f64(self, other: f64) -> Dd {
        let (s, e) = two_sum(self.hi, other);
        let e = e + self.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, other: f64) -> Dd {
        let (p, e) = two_prod(self.hi, other);
        let e = e + self.lo * other;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div_f64(self, other: f64) -> Dd {
        let q1 = self.hi / other;
        let (p, e) = two_prod(q1, other);
        let r = (self.hi - p) + (self.lo - e);
        let q2 = r / other;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul_f64(q1));
        let q2 = r.hi / other.hi;
        let r2 = r.sub(other.mul_f64(q2));
        let q3 = r2.hi / other.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add_f64(q3)
    }

    #[inline]
    pub fn abs(self) -> f64 {
        self.hi.abs()
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// `ln x` to double-double accuracy for positive finite `x`.
pub fn ln_dd(x: f64) -> Dd {
    let l = x.ln();
    // one Newton step: l + (x e^{-l} - 1)
    let corr = x * (-l).exp() - 1.0;
    Dd { hi: l, lo: 0.0 }.add_f64(corr)
}

/// `e^x` where the exponent is a double-double; the `lo` part enters as a
/// first-order correction factor.
pub fn exp_dd(x: Dd) -> f64 {
    x.hi.exp() * (1.0 + x.lo)
}

/// Complex double-double.
#[derive(Clone, Copy, Debug, Default)]
pub struct DdC {
    pub re: Dd,
    pub im: Dd,
}

impl DdC {
    pub const ZERO: DdC = DdC { re: Dd::ZERO, im: Dd::ZERO };
    pub const ONE: DdC = DdC { re: Dd::ONE, im: Dd::ZERO };

    #[inline]
    pub fn from(z: num_complex::Complex64) -> DdC {
        DdC { re: Dd::from(z.re), im: Dd::from(z.im) }
    }

    #[inline]
    pub fn add(self, other: DdC) -> DdC {
        DdC { re: self.re.add(other.re), im: self.im.add(other.im) }
    }

    #[inline]
    pub fn mul(self, other: DdC) -> DdC {
        DdC {
            re: self.re.mul(other.re).sub(self.im.mul(other.im)),
            im: self.re.mul(other.im).add(self.im.mul(other.re)),
        }
    }

    #[inline]
    pub fn mul_dd(self, other: Dd) -> DdC {
        DdC { re: self.re.mul(other), im: self.im.mul(other) }
    }

    #[inline]
    pub fn div_f64(self, other: f64) -> DdC {
        DdC { re: self.re.div_f64(other), im: self.im.div_f64(other) }
    }

    #[inline]
    pub fn div_dd(self, other: Dd) -> DdC {
        DdC { re: self.re.div(other), im: self.im.div(other) }
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.re.hi.hypot(self.im.hi)
    }

    #[inline]
    pub fn to_c64(self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_keeps_small_residue() {
        let a = Dd::from(1.0);
        let b = Dd::from(1e-20);
        let s = a.add(b);
        assert_eq!(s.hi, 1.0);
        assert_eq!(s.lo, 1e-20);
    }

    #[test]
    fn mul_exact_product() {
        // (1 + 2^-30)^2 = 1 + 2^-29 + 2^-60, exactly representable in dd
        let x = Dd::from(1.0 + (0.5f64).powi(30));
        let p = x.mul(x);
        let expect_lo = (0.5f64).powi(60);
        assert_eq!(p.hi, 1.0 + (0.5f64).powi(29));
        assert!((p.lo - expect_lo).abs() < 1e-70);
    }

    #[test]
    fn div_roundtrip() {
        let a = Dd::from(std::f64::consts::PI);
        let b = Dd::from(std::f64::consts::E);
        let q = a.div(b);
        let back = q.mul(b);
        assert!((back.to_f64() - std::f64::consts::PI).abs() < 1e-30);
        assert!((back.sub(a).abs()) < 1e-30);
    }

    #[test]
    fn ln_dd_consistency() {
        let l = ln_dd(2.0);
        let expect = std::f64::consts::LN_2;
        assert!((l.hi - expect).abs() < 1e-15);
        // exp(ln 2) == 2 to dd accuracy
        assert!((exp_dd(l) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn alternating_cancellation() {
        // sum_k (-25)^k / k! = e^{-25}: ~21 digits cancel, far beyond f64
        // but comfortably inside the double-double budget
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        for k in 1..200 {
            term = term.mul_f64(-25.0).div_f64(k as f64);
            sum = sum.add(term);
        }
        let expect = (-25.0f64).exp();
        assert!(((sum.to_f64() - expect) / expect).abs() < 1e-10);
    }
}
