//! Meijer G-function by numerical Mellin-Barnes quadrature.
//!
//! Only the parameter families the product-ensemble kernels need are
//! admitted. Three contour routes cover them:
//!
//! * a left loop (two arms at 3pi/4 around the numerator-gamma poles) --
//!   converges factorially for every admitted family and any z != 0;
//! * a single vertical line through the real saddle |z|^{1/q} for the
//!   all-numerator (m = q) shape;
//! * a pair of vertical lines after splitting the single reflected
//!   denominator gamma via 1/Gamma(1-s) = Gamma(s) sin(pi s)/pi, each line
//!   passing through its own complex saddle -- this keeps the quadrature
//!   well-conditioned for the m = q-1 shape at large |z|, where both the
//!   plain line and the loop lose all significant digits.
//!
//! Everything is evaluated in log space, so huge parameter values (the
//! truncation sizes mu) never overflow; `eval_scaled` exposes the scale.

use crate::contour::{gauss_legendre, KernelResult};
use crate::error::{Error, Result};
use crate::specfun::gamma::log_gamma;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Parameter block for G^{m,n}_{p,q} with p = a.len(), q = b.len().
#[derive(Clone, Debug)]
pub struct MeijerGSpec {
    pub m: usize,
    pub n: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Route {
    LeftLoop,
    SaddleLine,
    SplitLines,
}

impl MeijerGSpec {
    /// Admits the four families the kernels use:
    /// G^{1,0}_{0,q}, G^{m,0}_{0,q} (m = q-1 or m = q), G^{1,p}_{p,q} with
    /// q >= p+2, and G^{q-1,0}_{p,q} with 1 <= p <= q-2.
    pub fn new(m: usize, n: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let p = a.len();
        let q = b.len();
        if m > q || n > p {
            return Err(Error::SpecShape(format!(
                "need m <= q and n <= p, got m={m} n={n} p={p} q={q}"
            )));
        }
        if q == 0 {
            return Err(Error::SpecShape("empty lower parameter list".into()));
        }
        let admitted = (n == 0 && p == 0 && (1..=q).contains(&m))
            || (m == 1 && n == p && p >= 1 && q >= p + 2)
            || (n == 0 && p >= 1 && m + 1 == q && q >= p + 2);
        if !admitted {
            return Err(Error::SpecShape(format!(
                "(m,n,p,q) = ({m},{n},{p},{q}) outside the admitted families"
            )));
        }
        Ok(MeijerGSpec { m, n, a, b })
    }

    pub fn p(&self) -> usize {
        self.a.len()
    }

    pub fn q(&self) -> usize {
        self.b.len()
    }

    /// Effective algebraic order q - p; controls saddle positions.
    fn q_eff(&self) -> f64 {
        (self.q() - self.p()) as f64
    }

    /// Base abscissa right of every numerator pole.
    fn base_abscissa(&self) -> f64 {
        let min_b = self.b[..self.m].iter().cloned().fold(f64::INFINITY, f64::min);
        let mut c = (0.5f64).max(0.5 - min_b);
        if self.n > 0 {
            // stay left of the poles of Gamma(1 - a_j - s)
            let right_poles = self.a[..self.n].iter().map(|&aj| 1.0 - aj).fold(f64::INFINITY, f64::min);
            c = c.min(0.6 * right_poles);
        }
        c
    }

    fn route(&self, z_mag: f64) -> Route {
        let qe = self.q_eff();
        // the loop's cancellation is driven by the dominant residue series,
        // whose terms are damped by the gamma factors of the other lower
        // parameters; a large parameter keeps the loop well-conditioned far
        // beyond the O(1)-parameter threshold
        let min_b = self.b[..self.m].iter().cloned().fold(f64::INFINITY, f64::min);
        let mut damping = 1.0f64;
        let mut skipped_min = false;
        for &bj in &self.b[..self.m] {
            if !skipped_min && bj == min_b {
                skipped_min = true;
                continue;
            }
            damping *= 1.0 + (bj - min_b).max(0.0);
        }
        let z_eff = z_mag / damping;
        let large = qe * z_eff.powf(1.0 / qe) > 20.0;
        // the off-axis saddle estimate |z|^{1/qe} must also dominate the
        // parameter scale for the two-line split to sit on true saddles
        let rad = z_mag.powf(1.0 / qe);
        let max_b = self.b[..self.m].iter().cloned().fold(0.0f64, f64::max);
        let saddle_ok = max_b <= 0.5 * rad;
        if self.n == 0 && self.p() == 0 && self.m == self.q() && self.m >= 2 {
            if large && saddle_ok {
                return Route::SaddleLine;
            }
            return Route::LeftLoop;
        }
        if self.n == 0
            && self.m + 1 == self.q()
            && self.m >= 2
            && large
            && saddle_ok
            && qe >= 3.0
        {
            return Route::SplitLines;
        }
        Route::LeftLoop
    }

    /// Full log-integrand of the plain Mellin-Barnes form (without 1/2pi i).
    fn log_integrand(&self, s: Complex64, logz: Complex64) -> Complex64 {
        let mut l = Complex64::new(0.0, 0.0);
        for j in 0..self.q() {
            let arg = self.b[j] + s;
            if j < self.m {
                l += log_gamma(arg).unwrap_or(Complex64::new(-1e30, 0.0));
            } else {
                l -= log_gamma(1.0 - self.b[j] - s).unwrap_or(Complex64::new(1e30, 0.0));
            }
        }
        for j in 0..self.p() {
            if j < self.n {
                l += log_gamma(1.0 - self.a[j] - s).unwrap_or(Complex64::new(-1e30, 0.0));
            } else {
                l -= log_gamma(self.a[j] + s).unwrap_or(Complex64::new(1e30, 0.0));
            }
        }
        l - s * logz
    }

    /// Log of F(s) = prod Gamma(b_j + s) * Gamma(bhat + s) * z^{-s} / prod Gamma(a_j + s)
    /// for the split route (bhat is the single reflected lower parameter).
    fn log_split_f(&self, s: Complex64, logz: Complex64) -> Complex64 {
        let bhat = self.b[self.m]; // exactly one reflected b in this shape
        let mut l = log_gamma(bhat + s).unwrap_or(Complex64::new(-1e30, 0.0));
        for j in 0..self.m {
            l += log_gamma(self.b[j] + s).unwrap_or(Complex64::new(-1e30, 0.0));
        }
        for j in 0..self.p() {
            l -= log_gamma(self.a[j] + s).unwrap_or(Complex64::new(1e30, 0.0));
        }
        l - s * logz
    }

    /// G(z) with an order-doubling error estimate; errors out if two
    /// doublings fail to stabilize to 1e-9 relative.
    pub fn eval(&self, z: Complex64, contour_order: usize) -> Result<KernelResult> {
        let (v, ls, err, nodes) = self.eval_scaled(z, contour_order)?;
        let total = ls + v.norm().ln();
        if total > 700.0 {
            return Err(Error::Overflow { exponent: total / std::f64::consts::LN_10 });
        }
        Ok(KernelResult { value: v * ls.exp(), err_estimate: err * v.norm() * ls.exp(), node_budget: nodes })
    }

    /// Scaled evaluation: returns (value, log_scale, relative error
    /// estimate, node budget) with G = value * exp(log_scale).
    pub fn eval_scaled(&self, z: Complex64, contour_order: usize) -> Result<(Complex64, f64, f64, usize)> {
        if z.norm() == 0.0 {
            return Err(Error::Domain("Meijer G needs z != 0".into()));
        }
        self.eval_scaled_logz(z.ln(), contour_order)
    }

    /// As `eval_scaled` but with the caller-chosen branch of log z; kernel
    /// code uses this to continue the branch along its own v-contours.
    pub fn eval_scaled_logz(&self, logz: Complex64, contour_order: usize) -> Result<(Complex64, f64, f64, usize)> {
        let order = contour_order.max(8);
        let (v1, m1, n1) = self.eval_once(logz, order);
        let (v2, m2, n2) = self.eval_once(logz, order * 2);
        let scale2 = v2.norm().max(1e-300);
        let delta = (v2 - v1 * (m1 - m2).exp()).norm();
        if delta <= 1e-9 * scale2 {
            return Ok((v2, m2, delta / scale2, n1 + n2));
        }
        let (v4, m4, n4) = self.eval_once(logz, order * 4);
        let scale4 = v4.norm().max(1e-300);
        let delta2 = (v4 - v2 * (m2 - m4).exp()).norm();
        if delta2 <= 1e-9 * scale4 {
            return Ok((v4, m4, delta2 / scale4, n1 + n2 + n4));
        }
        Err(Error::Nonconvergence {
            estimate: v4 * m4.exp().min(f64::MAX),
            err: delta2 / scale4,
        })
    }

    fn eval_once(&self, logz: Complex64, order: usize) -> (Complex64, f64, usize) {
        let zmag = logz.re.exp();
        match self.route(zmag) {
            Route::LeftLoop => {
                let c0 = self.base_abscissa();
                let arm0 = 2.0 * zmag.powf(1.0 / self.q_eff()) + 10.0;
                let (sum, mx, n) =
                    walk_loop(c0, arm0, order, |s| self.log_integrand(s, logz));
                // 1/(2 pi i)
                (sum / Complex64::new(0.0, 2.0 * PI), mx, n)
            }
            Route::SaddleLine => {
                let qe = self.q_eff();
                let c = self.base_abscissa().max(zmag.powf(1.0 / qe));
                let t0 = zmag.powf(1.0 / qe) + 4.0;
                let (sum, mx, n) =
                    walk_line(c, t0, order, |s| self.log_integrand(s, logz));
                (sum / Complex64::new(0.0, 2.0 * PI), mx, n)
            }
            Route::SplitLines => {
                let qe = self.q_eff();
                let bhat = self.b[self.m];
                let phi = logz.im;
                let rad = zmag.powf(1.0 / qe);
                let i = Complex64::new(0.0, 1.0);
                let mut vals = [Complex64::new(0.0, 0.0); 2];
                let mut scales = [0.0f64; 2];
                let mut nodes = 0usize;
                for (idx, sgn) in [(0usize, 1.0f64), (1usize, -1.0f64)] {
                    let c = self
                        .base_abscissa()
                        .max(rad * ((phi - sgn * PI) / qe).cos());
                    let t0 = rad + 4.0;
                    let (sum, mx, n) = walk_line(c, t0, order, |s| {
                        self.log_split_f(s, logz) + sgn * i * PI * (bhat + s)
                    });
                    vals[idx] = sum;
                    scales[idx] = mx;
                    nodes += n;
                }
                // G = -(1/4pi^2) (I_+ - I_-)
                let mx = scales[0].max(scales[1]);
                let combined = (vals[0] * (scales[0] - mx).exp()
                    - vals[1] * (scales[1] - mx).exp())
                    * (-1.0 / (4.0 * PI * PI));
                (combined, mx, nodes)
            }
        }
    }
}

/// Evaluate `meijer_g` for a validated spec; the contract-level entry point.
pub fn meijer_g(spec: &MeijerGSpec, z: Complex64, contour_order: usize) -> Result<KernelResult> {
    spec.eval(z, contour_order)
}

const LOG_CUT: f64 = 38.0; // stop panels 1e-16.5 below the running max

/// Sum exp(log_f) over a vertical line at abscissa `c`, walking panels of
/// width 2 outward from [-t0, t0] until the integrand is negligible.
/// Returns (sum * e^{-M}, M, nodes) with M the max of Re log_f.
fn walk_line<F: Fn(Complex64) -> Complex64>(
    c: f64,
    t0: f64,
    order: usize,
    log_f: F,
) -> (Complex64, f64, usize) {
    let (xs, ws) = gauss_legendre(order);
    let i = Complex64::new(0.0, 1.0);
    let mut entries: Vec<(Complex64, Complex64)> = Vec::new(); // (weight, log value)
    let mut mx = f64::NEG_INFINITY;

    let do_panel = |a: f64, b: f64, entries: &mut Vec<(Complex64, Complex64)>| -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut panel_max = f64::NEG_INFINITY;
        for (x, w) in xs.iter().zip(ws.iter()) {
            let s = Complex64::new(c, mid + half * x);
            let l = log_f(s);
            panel_max = panel_max.max(l.re);
            entries.push((i * (w * half), l));
        }
        panel_max
    };

    let n0 = ((t0 / 2.0).ceil() as usize).max(2);
    for k in 0..n0 {
        let a = -(t0) + 2.0 * t0 * k as f64 / n0 as f64;
        let b = -(t0) + 2.0 * t0 * (k + 1) as f64 / n0 as f64;
        mx = mx.max(do_panel(a, b, &mut entries));
    }
    // extend upward
    let mut hi = t0;
    for _ in 0..300 {
        let pm = do_panel(hi, hi + 2.0, &mut entries);
        hi += 2.0;
        mx = mx.max(pm);
        if pm < mx - LOG_CUT {
            break;
        }
    }
    // extend downward
    let mut lo = -t0;
    for _ in 0..300 {
        let pm = do_panel(lo - 2.0, lo, &mut entries);
        lo -= 2.0;
        mx = mx.max(pm);
        if pm < mx - LOG_CUT {
            break;
        }
    }

    let mut sum = Complex64::new(0.0, 0.0);
    for (w, l) in &entries {
        let e = l - mx;
        if e.re > -745.0 {
            sum += w * e.exp();
        }
    }
    (sum, mx, entries.len())
}

/// Same walking scheme along a left loop: two arms at 3pi/4 from the vertex
/// abscissa `c0`, traversed counterclockwise around the poles on the left.
fn walk_loop<F: Fn(Complex64) -> Complex64>(
    c0: f64,
    arm0: f64,
    order: usize,
    log_f: F,
) -> (Complex64, f64, usize) {
    let (xs, ws) = gauss_legendre(order);
    let theta = 3.0 * PI / 4.0;
    let dir_up = Complex64::from_polar(1.0, theta);
    let dir_dn = Complex64::from_polar(1.0, -theta);
    let mut entries: Vec<(Complex64, Complex64)> = Vec::new();
    let mut mx = f64::NEG_INFINITY;

    let do_panel = |a: f64,
                        b: f64,
                        dir: Complex64,
                        sign: f64,
                        entries: &mut Vec<(Complex64, Complex64)>|
     -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut panel_max = f64::NEG_INFINITY;
        for (x, w) in xs.iter().zip(ws.iter()) {
            let t = mid + half * x;
            let s = Complex64::new(c0, 0.0) + dir * t;
            let l = log_f(s);
            panel_max = panel_max.max(l.re);
            entries.push((dir * (sign * w * half), l));
        }
        panel_max
    };

    // graded panels near the vertex, then width 2
    let mut breaks = vec![0.0, 0.5, 1.0, 2.0];
    let mut t = 2.0;
    while t < arm0 {
        t += 2.0;
        breaks.push(t);
    }
    for win in breaks.windows(2) {
        // upper arm outward (+), lower arm traversed inward (-)
        mx = mx.max(do_panel(win[0], win[1], dir_up, 1.0, &mut entries));
        mx = mx.max(do_panel(win[0], win[1], dir_dn, -1.0, &mut entries));
    }
    let mut far = *breaks.last().unwrap();
    for _ in 0..300 {
        let pm_up = do_panel(far, far + 2.0, dir_up, 1.0, &mut entries);
        let pm_dn = do_panel(far, far + 2.0, dir_dn, -1.0, &mut entries);
        far += 2.0;
        let pm = pm_up.max(pm_dn);
        mx = mx.max(pm);
        if pm < mx - LOG_CUT {
            break;
        }
    }

    let mut sum = Complex64::new(0.0, 0.0);
    for (w, l) in &entries {
        let e = l - mx;
        if e.re > -745.0 {
            sum += w * e.exp();
        }
    }
    (sum, mx, entries.len())
}
