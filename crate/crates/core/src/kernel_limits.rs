//! Hard-edge limit kernels across the phase transition, the generalized
//! multiple functions, and Fredholm-determinant gap probabilities.
//!
//! The critical-family kernels are double integrals with the outer variable
//! on (0, inf) under a Gaussian damping and the inner one on the imaginary
//! axis (or a parallel line for the deformed kernels). The Gaussian bounds
//! fix the truncations; the inner line is opened around the origin by a
//! small epsilon whose independence is checked by halving.

use crate::contour::{gauss_legendre, ContourSpec, KernelResult};
use crate::dd::{Dd, DdC};
use crate::error::{Error, Result};
use crate::kernel_finite::{phi_q_scaled_params, phi_scaled, psi_q_scaled_params, psi_scaled};
use crate::kernel_finite::EnsembleSpec;
use crate::specfun::{
    bessel_j, g10_series, g1q_series_scaled, hyp0f1, ln_gamma_real_pos, MeijerGSpec,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitFamily {
    Meijer,
    Critical,
    DeformedCritical,
    SupercriticalR0,
    MeijerUnitary,
    DeformedCriticalUnitary,
}

/// Parameters of one limiting kernel.
#[derive(Clone, Debug)]
pub struct LimitKernelSpec {
    pub family: LimitFamily,
    pub r: usize,
    pub nu: Vec<f64>,
    /// Finite truncation parameters (unitary families), length q <= r.
    pub mu_finite: Vec<f64>,
    /// Double-scaling parameter of the critical families.
    pub tau: f64,
    /// Outlier source values of the deformed/supercritical families.
    pub sigma: Vec<f64>,
    /// (b-1)/b for the supercritical scaling, in (0, 1].
    pub kappa: f64,
    /// Line abscissa for the deformed families, 0 < c < min sigma.
    pub c_abscissa: f64,
}

impl LimitKernelSpec {
    fn base(family: LimitFamily, nu: Vec<f64>) -> Result<Self> {
        if nu.is_empty() || nu.iter().any(|&v| v <= -1.0) {
            return Err(Error::SpecShape("need nu_0..nu_r, all > -1".into()));
        }
        let r = nu.len() - 1;
        Ok(LimitKernelSpec {
            family,
            r,
            nu,
            mu_finite: vec![],
            tau: 0.0,
            sigma: vec![],
            kappa: 1.0,
            c_abscissa: 0.5,
        })
    }

    pub fn meijer(nu: Vec<f64>) -> Result<Self> {
        Self::base(LimitFamily::Meijer, nu)
    }

    pub fn critical(nu: Vec<f64>, tau: f64) -> Result<Self> {
        let mut s = Self::base(LimitFamily::Critical, nu)?;
        s.tau = tau;
        Ok(s)
    }

    pub fn deformed_critical(
        nu: Vec<f64>,
        tau: f64,
        sigma: Vec<f64>,
        c_abscissa: f64,
    ) -> Result<Self> {
        if sigma.iter().any(|&s| s <= 0.0) {
            return Err(Error::SpecShape("sigma values must be positive".into()));
        }
        let min_sigma = sigma.iter().cloned().fold(f64::INFINITY, f64::min);
        if c_abscissa <= 0.0 || c_abscissa >= min_sigma {
            return Err(Error::SpecShape(format!(
                "need 0 < c < min sigma, got c = {c_abscissa}, min sigma = {min_sigma}"
            )));
        }
        let mut s = Self::base(LimitFamily::DeformedCritical, nu)?;
        s.tau = tau;
        s.sigma = sigma;
        s.c_abscissa = c_abscissa;
        Ok(s)
    }

    pub fn supercritical_r0(nu0: f64, sigma: Vec<f64>) -> Result<Self> {
        if sigma.is_empty() {
            return Err(Error::SpecShape("supercritical kernel needs outliers".into()));
        }
        if sigma.iter().any(|&s| s <= 0.0) {
            return Err(Error::SpecShape("sigma values must be positive".into()));
        }
        let mut s = Self::base(LimitFamily::SupercriticalR0, vec![nu0])?;
        s.sigma = sigma;
        Ok(s)
    }

    pub fn meijer_unitary(nu: Vec<f64>, mu_finite: Vec<f64>) -> Result<Self> {
        let mut s = Self::base(LimitFamily::MeijerUnitary, nu)?;
        if mu_finite.len() > s.r {
            return Err(Error::SpecShape("need q <= r finite mu values".into()));
        }
        s.mu_finite = mu_finite;
        Ok(s)
    }

    pub fn deformed_critical_unitary(
        nu: Vec<f64>,
        mu_finite: Vec<f64>,
        tau: f64,
        sigma: Vec<f64>,
        c_abscissa: f64,
    ) -> Result<Self> {
        let mut s = Self::deformed_critical(nu, tau, sigma, c_abscissa)?;
        if mu_finite.len() > s.r {
            return Err(Error::SpecShape("need q <= r finite mu values".into()));
        }
        s.family = LimitFamily::DeformedCriticalUnitary;
        s.mu_finite = mu_finite;
        Ok(s)
    }
}

// ---------------------------------------------------------------------------
// G-factor providers
// ---------------------------------------------------------------------------

/// First kernel factor G^{1,q}_{q,r+2}(z) as a scaled exact series.
fn g1_scaled(spec: &LimitKernelSpec, z: Complex64) -> Result<(Complex64, f64)> {
    if spec.mu_finite.is_empty() {
        Ok((g10_series(&spec.nu, z)?, 0.0))
    } else {
        g1q_series_scaled(&spec.mu_finite, &spec.nu, z)
    }
}

/// Second kernel factor paired with v^{-nu0}: (value, log_scale) of
/// v^{-nu0} G^{r+1,0}_{q,r+2}(v eta) for a caller-continued log v.
///
/// At r = 0 (Ginibre) the pair collapses to the entire function
/// eta^{nu0} 0F1(nu0+1; -v eta) / Gamma(nu0+1), free of any branch.
fn g2_pair_scaled(
    spec: &LimitKernelSpec,
    log_v: Complex64,
    eta: f64,
    order: usize,
) -> Result<(Complex64, f64)> {
    let nu0 = spec.nu[0];
    if spec.r == 0 && spec.mu_finite.is_empty() {
        let v = log_v.exp();
        let f = hyp0f1(nu0 + 1.0, -v * eta)?;
        let m = f.norm().max(1e-300);
        return Ok((f / m, nu0 * eta.ln() - ln_gamma_real_pos(nu0 + 1.0) + m.ln()));
    }
    let mut b: Vec<f64> = spec.nu.clone();
    b.push(0.0);
    let g2 = MeijerGSpec::new(spec.nu.len(), 0, spec.mu_finite.clone(), b)?;
    let logz = log_v + eta.ln();
    let (val, ls, _err, _n) = g2.eval_scaled_logz(logz, order)?;
    let pair_log = -nu0 * log_v;
    Ok((val * Complex64::new(0.0, pair_log.im).exp(), ls + pair_log.re))
}

// ---------------------------------------------------------------------------
// node sets
// ---------------------------------------------------------------------------

fn u_halfline_nodes(spec: &LimitKernelSpec, order: usize) -> Vec<(f64, f64)> {
    // Gaussian bound |tau| + 9, extended if the u^{nu0} (or outlier) growth
    // pushes the integrand peak beyond it
    let nu0 = spec.nu[0];
    let g = |u: f64| -> f64 {
        let mut s = nu0 * u.ln() - spec.tau * u - 0.5 * u * u;
        for &sg in &spec.sigma {
            s += (u + sg).ln();
        }
        s
    };
    let mut gmax = f64::NEG_INFINITY;
    let mut u = 1e-3;
    while u < 1e4 {
        gmax = gmax.max(g(u));
        u *= 1.12;
    }
    let mut u_max = spec.tau.abs() + 9.0;
    u = 1e-3;
    while u < 1e4 {
        if g(u) > gmax - 46.0 {
            u_max = u_max.max(u * 1.15);
        }
        u *= 1.12;
    }
    let p = if nu0 == nu0.round() && nu0 >= 0.0 {
        1u32
    } else {
        (2.0f64).max((3.0 / (nu0 + 1.0)).ceil()) as u32
    };
    let (xs, ws) = gauss_legendre(order);
    let panels = 12usize;
    let hi = u_max.powf(1.0 / p as f64);
    let mut nodes = Vec::with_capacity(order * panels);
    for k in 0..panels {
        let a = hi * k as f64 / panels as f64;
        let b = hi * (k + 1) as f64 / panels as f64;
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for (x, w) in xs.iter().zip(ws.iter()) {
            let t = mid + half * x;
            let u = t.powi(p as i32);
            let du = p as f64 * t.powi(p as i32 - 1);
            nodes.push((u, w * half * du));
        }
    }
    nodes
}

/// The split imaginary axis: two rays +-i [eps, T], both traversed upward.
fn v_imaginary_nodes(
    spec: &LimitKernelSpec,
    eps: f64,
    order: usize,
) -> Vec<(Complex64, Complex64)> {
    // Gaussian decay e^{-t^2/2} against the |v|^{-nu0} growth
    let nu0 = spec.nu[0];
    let mut t_max = spec.tau.abs() + 9.0;
    let b = |t: f64| -> f64 { -0.5 * t * t - nu0 * t.ln() };
    let mut bmax = f64::NEG_INFINITY;
    let mut t = 1.0;
    while t < 1e3 {
        bmax = bmax.max(b(t));
        t *= 1.1;
    }
    t = 1.0;
    while t < 1e3 {
        if b(t) > bmax - 46.0 {
            t_max = t_max.max(t * 1.1);
        }
        t *= 1.1;
    }
    let (xs, ws) = gauss_legendre(order);
    let i = Complex64::new(0.0, 1.0);
    let mut nodes = Vec::new();
    // geometric panels from eps resolve all scales near the origin
    let mut breaks = vec![eps];
    let mut t = eps;
    while t < 1.0 {
        t *= 4.0;
        breaks.push(t.min(1.0));
    }
    while *breaks.last().unwrap() < t_max {
        let next = (breaks.last().unwrap() + 1.5).min(t_max);
        breaks.push(next);
    }
    for win in breaks.windows(2) {
        let mid = 0.5 * (win[0] + win[1]);
        let half = 0.5 * (win[1] - win[0]);
        for (x, w) in xs.iter().zip(ws.iter()) {
            let t = mid + half * x;
            nodes.push((i * t, i * (w * half)));
            nodes.push((-i * t, i * (w * half)));
        }
    }
    nodes
}

/// Vertical line Re v = -c for the deformed families.
fn v_line_nodes(spec: &LimitKernelSpec, order: usize) -> Vec<(Complex64, Complex64)> {
    let c = spec.c_abscissa;
    let nu0 = spec.nu[0];
    let b = |t: f64| -> f64 {
        0.5 * (c * c - t * t) - spec.tau * c - nu0 * 0.5 * (c * c + t * t).ln()
    };
    let mut t_max = spec.tau.abs() + 9.0 + c;
    let mut bmax = f64::NEG_INFINITY;
    let mut t = 1.0;
    while t < 1e3 {
        bmax = bmax.max(b(t));
        t *= 1.1;
    }
    t = 1.0;
    while t < 1e3 {
        if b(t) > bmax - 46.0 {
            t_max = t_max.max(t * 1.1);
        }
        t *= 1.1;
    }
    let panels = ((t_max.ceil() as usize).max(10)).min(120);
    let line = ContourSpec::vertical_line(-c, t_max).with_order(order, panels);
    line.nodes()
}

/// Continued log of v along the deformed line: branch cut on the positive
/// real axis, arg in (pi/2, 3pi/2), continued down from +i infinity.
fn log_v_continued(v: Complex64) -> Complex64 {
    let mut th = v.arg();
    if th <= 0.0 {
        th += 2.0 * PI;
    }
    Complex64::new(v.norm().ln(), th)
}

// ---------------------------------------------------------------------------
// kernel assembly for the critical families
// ---------------------------------------------------------------------------

struct CriticalAssembly<'a> {
    spec: &'a LimitKernelSpec,
    u_nodes: Vec<(f64, f64)>,
    v_nodes: Vec<(Complex64, Complex64)>,
    log_v: Vec<Complex64>,
    g_order: usize,
}

impl<'a> CriticalAssembly<'a> {
    fn new(spec: &'a LimitKernelSpec, eps: f64, order: usize, g_order: usize) -> Self {
        let u_nodes = u_halfline_nodes(spec, order);
        let (v_nodes, log_v) = match spec.family {
            LimitFamily::Critical => {
                let nodes = v_imaginary_nodes(spec, eps, order);
                // principal log: arg is +-pi/2 on the two rays
                let logs = nodes.iter().map(|&(v, _)| v.ln()).collect();
                (nodes, logs)
            }
            _ => {
                let nodes = v_line_nodes(spec, order);
                let logs = nodes.iter().map(|&(v, _)| log_v_continued(v)).collect();
                (nodes, logs)
            }
        };
        CriticalAssembly { spec, u_nodes, v_nodes, log_v, g_order }
    }

    fn eval(&self, xi: f64, eta: f64) -> Result<Complex64> {
        let spec = self.spec;
        let nu0 = spec.nu[0];
        let tau = spec.tau;

        // v side
        let mut bmax = f64::NEG_INFINITY;
        let mut v_data: Vec<(Complex64, Complex64)> = Vec::with_capacity(self.v_nodes.len());
        for (j, &(v, w)) in self.v_nodes.iter().enumerate() {
            let (g2, g2s) = g2_pair_scaled(spec, self.log_v[j], eta, self.g_order)?;
            let mut l = tau * v + 0.5 * v * v + g2s;
            for &sg in &spec.sigma {
                l -= (v + sg).ln();
            }
            bmax = bmax.max(l.re + g2.norm().max(1e-300).ln());
            v_data.push((w * g2, l));
        }
        let vfold: Vec<Complex64> = v_data
            .iter()
            .map(|&(wg, l)| {
                let e = l - bmax;
                if e.re > -745.0 {
                    wg * e.exp()
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();

        // u side with double-double exponents: at large negative tau the
        // whole double sum cancels by e^{tau^2/2}, so the exponent itself
        // has to carry more than f64 precision
        let mut amax = f64::NEG_INFINITY;
        let mut a_exp: Vec<Dd> = Vec::with_capacity(self.u_nodes.len());
        let mut g1_vals: Vec<Complex64> = Vec::with_capacity(self.u_nodes.len());
        for &(u, _) in &self.u_nodes {
            let mut a = crate::dd::ln_dd(u).mul_f64(nu0);
            a = a.add(Dd::from(-tau).mul_f64(u));
            a = a.add(Dd::from(-0.5 * u).mul_f64(u));
            for &sg in &spec.sigma {
                a = a.add(crate::dd::ln_dd(u + sg));
            }
            let (g1, g1s) = g1_scaled(spec, Complex64::new(u * xi, 0.0))?;
            a = a.add_f64(g1s);
            amax = amax.max(a.hi);
            a_exp.push(a);
            g1_vals.push(g1);
        }

        let mut total = DdC::ZERO;
        for (i, &(u, w)) in self.u_nodes.iter().enumerate() {
            let ea = a_exp[i].add_f64(-amax);
            if ea.hi < -745.0 {
                continue;
            }
            let mut inner = Complex64::new(0.0, 0.0);
            for (j, &(v, _)) in self.v_nodes.iter().enumerate() {
                inner += vfold[j] / (u - v);
            }
            let factor = crate::dd::exp_dd(ea) * w;
            total = total.add(DdC::from(inner * g1_vals[i] * factor));
        }
        Ok(total.to_c64() * (amax + bmax).exp() / Complex64::new(0.0, 2.0 * PI))
    }
}

const CRIT_EPS: f64 = 1e-6;

fn critical_family_eval(
    xi: f64,
    eta: f64,
    spec: &LimitKernelSpec,
    order: usize,
    g_order: usize,
) -> Result<KernelResult> {
    if xi <= 0.0 || eta <= 0.0 {
        return Err(Error::Domain("kernel arguments must be positive".into()));
    }
    let base = CriticalAssembly::new(spec, CRIT_EPS, order, g_order);
    let v0 = base.eval(xi, eta)?;
    let fine = CriticalAssembly::new(spec, CRIT_EPS, order + order / 2, g_order);
    let v1 = fine.eval(xi, eta)?;
    let mut err = (v1 - v0).norm();
    let mut value = v1;
    if spec.family == LimitFamily::Critical {
        // the omitted (-i eps, i eps) segment and the joint (u,v) -> 0
        // corner bias the integral by O(eps^{1+nu0}): extrapolate with that
        // exponent, flag anything wilder
        let half = CriticalAssembly::new(spec, CRIT_EPS / 2.0, order + order / 2, g_order);
        let v2 = half.eval(xi, eta)?;
        let shift = (v2 - v1).norm();
        if shift > 0.05 * (1.0 + v1.norm()) {
            return Err(Error::EpsUnstable { shift, err });
        }
        let f = (0.5f64).powf(1.0 + spec.nu[0]);
        value = (v2 - v1 * f) / (1.0 - f);
        err += shift * f / (1.0 - f) * 0.5 + 1e-12 * value.norm();
    }
    Ok(KernelResult {
        value,
        err_estimate: err,
        node_budget: base.u_nodes.len() * base.v_nodes.len(),
    })
}

/// Critical kernel (v on the split imaginary axis).
pub fn critical_kernel(xi: f64, eta: f64, spec: &LimitKernelSpec) -> Result<KernelResult> {
    if spec.family != LimitFamily::Critical {
        return Err(Error::SpecShape("spec family must be critical".into()));
    }
    critical_family_eval(xi, eta, spec, 20, 16)
}

/// Deformed critical kernel (v on the line Re v = -c, outlier factors).
pub fn deformed_critical_kernel(
    xi: f64,
    eta: f64,
    spec: &LimitKernelSpec,
) -> Result<KernelResult> {
    if !matches!(
        spec.family,
        LimitFamily::DeformedCritical | LimitFamily::DeformedCriticalUnitary
    ) {
        return Err(Error::SpecShape("spec family must be deformed critical".into()));
    }
    critical_family_eval(xi, eta, spec, 20, 16)
}

/// Deformed critical kernel for the truncated-unitary chain.
pub fn deformed_critical_unitary_kernel(
    xi: f64,
    eta: f64,
    spec: &LimitKernelSpec,
) -> Result<KernelResult> {
    deformed_critical_kernel(xi, eta, spec)
}

// ---------------------------------------------------------------------------
// Meijer G-kernels (subcritical limits)
// ---------------------------------------------------------------------------

fn meijer_kernel_once(
    x: f64,
    y: f64,
    spec: &LimitKernelSpec,
    order: usize,
    g_order: usize,
) -> Result<Complex64> {
    // int_0^1 G1(u x) G2(u y) du; a power map absorbs the u^{min nu}
    // endpoint singularity when min nu is negative
    let min_nu = spec.nu.iter().cloned().fold(0.0f64, f64::min);
    let p: u32 = if min_nu < 0.0 && min_nu != min_nu.round() { 2 } else { 1 };
    let (xs, ws) = gauss_legendre(order);
    let panels = 8usize;
    let mut total = DdC::ZERO;
    let mut b: Vec<f64> = spec.nu.clone();
    b.push(0.0);
    let g2spec = MeijerGSpec::new(spec.nu.len(), 0, spec.mu_finite.clone(), b)?;
    let use_series_g2 = spec.r == 0 && spec.mu_finite.is_empty();
    let nu0 = spec.nu[0];
    for k in 0..panels {
        let a = k as f64 / panels as f64;
        let bb = (k + 1) as f64 / panels as f64;
        let mid = 0.5 * (a + bb);
        let half = 0.5 * (bb - a);
        for (t, w) in xs.iter().zip(ws.iter()) {
            let s = mid + half * t;
            let u = s.powi(p as i32);
            let du = p as f64 * s.powi(p as i32 - 1);
            let (g1, g1s) = g1_scaled(spec, Complex64::new(u * x, 0.0))?;
            let (g2, g2s) = if use_series_g2 {
                // G^{1,0}_{0,2}(z | nu0, 0) = z^{nu0} 0F1(nu0+1;-z)/Gamma(nu0+1)
                let z = u * y;
                let f = hyp0f1(nu0 + 1.0, Complex64::new(-z, 0.0))?;
                (f, nu0 * z.ln() - ln_gamma_real_pos(nu0 + 1.0))
            } else {
                let (v, ls, _e, _n) = g2spec.eval_scaled(Complex64::new(u * y, 0.0), g_order)?;
                (v, ls)
            };
            let scale = (g1s + g2s).exp();
            total = total.add(DdC::from(g1 * g2 * (scale * w * half * du)));
        }
    }
    Ok(total.to_c64())
}

/// Hard-edge kernel of the source-free limit: int_0^1 G1(ux) G2(uy) du.
pub fn meijer_kernel(x: f64, y: f64, spec: &LimitKernelSpec) -> Result<KernelResult> {
    if !matches!(spec.family, LimitFamily::Meijer | LimitFamily::MeijerUnitary) {
        return Err(Error::SpecShape("spec family must be a Meijer G-kernel".into()));
    }
    if x <= 0.0 || y <= 0.0 {
        return Err(Error::Domain("kernel arguments must be positive".into()));
    }
    let v1 = meijer_kernel_once(x, y, spec, 24, 16)?;
    let v2 = meijer_kernel_once(x, y, spec, 48, 16)?;
    let err = (v2 - v1).norm();
    if err > 1e-6 * (1.0 + v2.norm()) {
        return Err(Error::Nonconvergence { estimate: v2, err });
    }
    Ok(KernelResult { value: v2, err_estimate: err, node_budget: 0 })
}

/// Truncated-unitary subcritical kernel (reduces to `meijer_kernel` at q=0).
pub fn meijer_unitary_kernel(x: f64, y: f64, spec: &LimitKernelSpec) -> Result<KernelResult> {
    meijer_kernel(x, y, spec)
}

/// Classical hard-edge Bessel kernel: 1/4 int_0^1 J(sqrt(xt)) J(sqrt(yt)) dt.
pub fn bessel_hard_edge_kernel(nu: f64, x: f64, y: f64) -> Result<f64> {
    let (xs, ws) = gauss_legendre(32);
    let panels = 6usize;
    let mut total = 0.0;
    for k in 0..panels {
        let a = k as f64 / panels as f64;
        let b = (k + 1) as f64 / panels as f64;
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for (t, w) in xs.iter().zip(ws.iter()) {
            let s = mid + half * t;
            total += w * half * bessel_j(nu, (x * s).sqrt())? * bessel_j(nu, (y * s).sqrt())?;
        }
    }
    Ok(total / 4.0)
}

// ---------------------------------------------------------------------------
// supercritical r = 0
// ---------------------------------------------------------------------------

fn supercritical_once(
    xi: f64,
    eta: f64,
    spec: &LimitKernelSpec,
    order: usize,
) -> Result<Complex64> {
    let nu0 = spec.nu[0];
    let lg0 = ln_gamma_real_pos(nu0 + 1.0);
    let m = spec.sigma.len();
    let u_max = 50.0 + 3.0 * m as f64;
    let p: u32 = if nu0 == nu0.round() && nu0 >= 0.0 {
        1
    } else {
        (2.0f64).max((3.0 / (nu0 + 1.0)).ceil()) as u32
    };
    let (xs, ws) = gauss_legendre(order);
    let panels = 14usize;
    let mut u_nodes = Vec::new();
    let hi = u_max.powf(1.0 / p as f64);
    for k in 0..panels {
        let a = hi * k as f64 / panels as f64;
        let b = hi * (k + 1) as f64 / panels as f64;
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for (t, w) in xs.iter().zip(ws.iter()) {
            let s = mid + half * t;
            u_nodes.push((s.powi(p as i32), w * half * p as f64 * s.powi(p as i32 - 1)));
        }
    }
    // v circle around the outliers
    let smin = spec.sigma.iter().cloned().fold(f64::INFINITY, f64::min);
    let smax = spec.sigma.iter().cloned().fold(0.0f64, f64::max);
    let right = -0.4 * smin;
    let left = -smax - (m as f64).max(1.0);
    let circle = ContourSpec::circle(
        Complex64::new(0.5 * (left + right), 0.0),
        0.5 * (right - left),
    )
    .with_order(order, 12);
    let v_nodes = circle.nodes();

    let mut vfold = Vec::with_capacity(v_nodes.len());
    for &(v, w) in &v_nodes {
        let mut f = v.exp() * hyp0f1(nu0 + 1.0, -v * eta)?;
        for &sg in &spec.sigma {
            f /= v + sg;
        }
        vfold.push(w * f);
    }

    let mut total = DdC::ZERO;
    for &(u, w) in &u_nodes {
        let mut a = nu0 * u.ln() - u;
        for &sg in &spec.sigma {
            a += (u + sg).ln();
        }
        let g1 = hyp0f1(nu0 + 1.0, Complex64::new(-u * xi, 0.0))?;
        let mut inner = Complex64::new(0.0, 0.0);
        for (j, &(v, _)) in v_nodes.iter().enumerate() {
            inner += vfold[j] / (u - v);
        }
        total = total.add(DdC::from(inner * g1 * (w * a.exp())));
    }
    let pre = (nu0 * eta.ln() - 2.0 * lg0).exp();
    Ok(total.to_c64() * pre / Complex64::new(0.0, 2.0 * PI))
}

/// Supercritical limit at r = 0; equals e^{eta-xi} times the finite
/// shifted-mean kernel with the outliers as sources.
pub fn supercritical_kernel_r0(
    xi: f64,
    eta: f64,
    spec: &LimitKernelSpec,
) -> Result<KernelResult> {
    if spec.family != LimitFamily::SupercriticalR0 {
        return Err(Error::SpecShape("spec family must be supercritical r=0".into()));
    }
    let v1 = supercritical_once(xi, eta, spec, 20)?;
    let v2 = supercritical_once(xi, eta, spec, 32)?;
    let err = (v2 - v1).norm();
    Ok(KernelResult { value: v2, err_estimate: err, node_budget: 0 })
}

/// Conjectured supercritical kernel for r >= 1 (and its unitary analogue
/// through `mu_finite`). Exploratory diagnostics only, never asserted.
pub fn supercritical_kernel_conjectured(
    xi: f64,
    eta: f64,
    nu: &[f64],
    mu_finite: &[f64],
    kappa: f64,
    sigma: &[f64],
    exploratory: bool,
) -> Result<KernelResult> {
    if !exploratory {
        return Err(Error::SpecShape(
            "the general-r supercritical kernel is conjectural; pass exploratory = true".into(),
        ));
    }
    if !(0.0 < kappa && kappa <= 1.0) {
        return Err(Error::Domain("kappa must lie in (0, 1]".into()));
    }
    let nu0 = nu[0];
    let m = sigma.len();
    let u_max = 50.0 + 3.0 * m as f64;
    let (xs, ws) = gauss_legendre(20);
    let mut u_nodes = Vec::new();
    let panels = 12usize;
    for k in 0..panels {
        let a = u_max * k as f64 / panels as f64;
        let b = u_max * (k + 1) as f64 / panels as f64;
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for (t, w) in xs.iter().zip(ws.iter()) {
            u_nodes.push((mid + half * t, w * half));
        }
    }
    let smin = sigma.iter().cloned().fold(f64::INFINITY, f64::min);
    let smax = sigma.iter().cloned().fold(0.0f64, f64::max);
    let right = -0.4 * smin;
    let left = -smax - (m as f64).max(1.0);
    let circle = ContourSpec::circle(
        Complex64::new(0.5 * (left + right), 0.0),
        0.5 * (right - left),
    )
    .with_order(20, 12);
    let v_nodes = circle.nodes();

    let mut vfold = Vec::with_capacity(v_nodes.len());
    for &(v, w) in &v_nodes {
        let (pm, ps) = phi_q_scaled_params(v / kappa, kappa * eta, nu, mu_finite)?;
        let mut f = pm * (v + ps).exp() * w;
        for &sg in sigma {
            f /= v + sg;
        }
        vfold.push(f);
    }

    let mut total = Complex64::new(0.0, 0.0);
    for &(u, w) in &u_nodes {
        let (qm, qs) = if mu_finite.is_empty() {
            psi_scaled(Complex64::new(u / kappa, 0.0), kappa * xi, &dummy_spec(nu)?)?
        } else {
            psi_q_scaled_params(Complex64::new(u / kappa, 0.0), kappa * xi, nu, mu_finite)?
        };
        let mut a = nu0 * (u / kappa).ln() - u + qs;
        for &sg in sigma {
            a += (u + sg).ln();
        }
        let mut inner = Complex64::new(0.0, 0.0);
        for (j, &(v, _)) in v_nodes.iter().enumerate() {
            inner += vfold[j] / (u - v);
        }
        total += inner * qm * (w * a.exp());
    }
    Ok(KernelResult {
        value: total / Complex64::new(0.0, 2.0 * PI),
        err_estimate: f64::NAN, // exploratory: no certified estimate
        node_budget: 0,
    })
}

fn dummy_spec(nu: &[f64]) -> Result<EnsembleSpec> {
    EnsembleSpec::ginibre(1, nu.to_vec(), vec![1.0])
}

// ---------------------------------------------------------------------------
// generalized multiple functions
// ---------------------------------------------------------------------------

/// Gamma^{(k)} (tilde = false) or its type-I partner (tilde = true) of the
/// critical deformation.
pub fn multiple_fn_gamma(
    k: usize,
    x: f64,
    spec: &LimitKernelSpec,
    tilde: bool,
) -> Result<Complex64> {
    let m = spec.sigma.len();
    let ok = if tilde { k >= 1 && k <= m } else { k >= 1 && k <= m + 1 };
    if !ok {
        return Err(Error::SpecShape("index k out of range for the sigma set".into()));
    }
    let nu0 = spec.nu[0];
    let tau = spec.tau;
    if !tilde {
        // int_0^inf u^{nu0} e^{-tau u - u^2/2} G1(x u) prod_{j<k} (u+sigma_j) du
        let nodes = u_halfline_nodes(spec, 24);
        let mut total = DdC::ZERO;
        for &(u, w) in &nodes {
            let mut a = nu0 * u.ln() - tau * u - 0.5 * u * u;
            for &sg in &spec.sigma[..k - 1] {
                a += (u + sg).ln();
            }
            let (g1, g1s) = g1_scaled(spec, Complex64::new(x * u, 0.0))?;
            total = total.add(DdC::from(g1 * (w * (a + g1s).exp())));
        }
        Ok(total.to_c64())
    } else {
        // (1/2 pi i) int_{iR} v^{-nu0} e^{tau v + v^2/2} G2(x v)
        //            prod_{j<=k} (v+sigma_j)^{-1} dv
        let nodes = v_imaginary_nodes(spec, CRIT_EPS, 24);
        let mut total = DdC::ZERO;
        for &(v, w) in &nodes {
            let (g2, g2s) = g2_pair_scaled(spec, v.ln(), x, 16)?;
            let mut l = tau * v + 0.5 * v * v + g2s;
            let mut denom = Complex64::new(1.0, 0.0);
            for &sg in &spec.sigma[..k] {
                denom *= v + sg;
            }
            l -= denom.ln();
            if l.re > -745.0 {
                total = total.add(DdC::from(w * g2 * l.exp()));
            }
        }
        Ok(total.to_c64() / Complex64::new(0.0, 2.0 * PI))
    }
}

/// Laguerre-like multiple functions of the supercritical decomposition.
pub fn multiple_fn_laguerre(
    k: usize,
    x: f64,
    nu: &[f64],
    kappa: f64,
    sigma: &[f64],
    tilde: bool,
) -> Result<Complex64> {
    let m = sigma.len();
    let ok = if tilde { k >= 1 && k <= m } else { k >= 1 && k <= m + 1 };
    if !ok {
        return Err(Error::SpecShape("index k out of range for the sigma set".into()));
    }
    let nu0 = nu[0];
    let spec = dummy_spec(nu)?;
    if !tilde {
        // int_0^inf (u/kappa)^{nu0} e^{-u} Psi(u/kappa; kappa x)
        //           prod_{l<k} (u+sigma_l) du
        let u_max = 55.0;
        let (xs, ws) = gauss_legendre(24);
        let panels = 14usize;
        let mut total = DdC::ZERO;
        for kk in 0..panels {
            let a = u_max * kk as f64 / panels as f64;
            let b = u_max * (kk + 1) as f64 / panels as f64;
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            for (t, w) in xs.iter().zip(ws.iter()) {
                let u = mid + half * t;
                let (pm, ps) = psi_scaled(Complex64::new(u / kappa, 0.0), kappa * x, &spec)?;
                let mut l = nu0 * (u / kappa).ln() - u + ps;
                for &sg in &sigma[..k - 1] {
                    l += (u + sg).ln();
                }
                total = total.add(DdC::from(pm * (w * half * l.exp())));
            }
        }
        Ok(total.to_c64())
    } else {
        // (1/2 pi i) oint e^v Phi(v/kappa; kappa x) prod_{l<=k} (v+sigma_l)^{-1} dv
        let smin = sigma.iter().cloned().fold(f64::INFINITY, f64::min);
        let smax = sigma.iter().cloned().fold(0.0f64, f64::max);
        let right = -0.4 * smin;
        let left = -smax - 1.0;
        let circle = ContourSpec::circle(
            Complex64::new(0.5 * (left + right), 0.0),
            0.5 * (right - left),
        )
        .with_order(24, 12);
        let mut total = Complex64::new(0.0, 0.0);
        for (v, w) in circle.nodes() {
            let (pm, ps) = phi_scaled(v / kappa, kappa * x, &spec)?;
            let mut f = pm * (v + ps).exp();
            for &sg in &sigma[..k] {
                f /= v + sg;
            }
            total += w * f;
        }
        Ok(total / Complex64::new(0.0, 2.0 * PI))
    }
}

// ---------------------------------------------------------------------------
// Fredholm determinant gap probability
// ---------------------------------------------------------------------------

/// det(I - K) on L^2(0, s) by symmetrized Nystrom discretization with an
/// order-doubling error estimate.
pub fn gap_probability<F>(mut kernel: F, s: f64, order: usize) -> Result<KernelResult>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    if s <= 0.0 {
        return Err(Error::Domain("gap interval must have positive length".into()));
    }
    let mut det_at = |n: usize| -> Result<f64> {
        let (xs, ws) = gauss_legendre(n);
        let half = 0.5 * s;
        let pts: Vec<f64> = xs.iter().map(|x| half + half * x).collect();
        let sq: Vec<f64> = ws.iter().map(|w| (w * half).sqrt()).collect();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = -sq[i] * kernel(pts[i], pts[j])? * sq[j];
            }
            m[(i, i)] += 1.0;
        }
        Ok(m.determinant())
    };
    let d1 = det_at(order)?;
    let d2 = det_at(2 * order)?;
    let err = (d2 - d1).abs();
    if err > 1e-6 * (1.0 + d2.abs()) {
        return Err(Error::Nonconvergence {
            estimate: Complex64::new(d2, 0.0),
            err,
        });
    }
    if d2 < -1e-10 {
        return Err(Error::NegativeDeterminant(d2));
    }
    Ok(KernelResult {
        value: Complex64::new(d2, 0.0),
        err_estimate: err,
        node_budget: order * order * 5,
    })
}

/// Critical kernel with the second factor forced through the Mellin-Barnes
/// contour even at r = 0: a cross-check route for the closed forms.
pub fn critical_kernel_via_contour(
    xi: f64,
    eta: f64,
    spec: &LimitKernelSpec,
) -> Result<KernelResult> {
    if spec.family != LimitFamily::Critical {
        return Err(Error::SpecShape("spec family must be critical".into()));
    }
    let v1 = contour_route_once(xi, eta, spec, CRIT_EPS)?;
    let v2 = contour_route_once(xi, eta, spec, CRIT_EPS / 2.0)?;
    let f = (0.5f64).powf(1.0 + spec.nu[0]);
    Ok(KernelResult {
        value: (v2 - v1 * f) / (1.0 - f),
        err_estimate: (v2 - v1).norm(),
        node_budget: 0,
    })
}

fn contour_route_once(
    xi: f64,
    eta: f64,
    spec: &LimitKernelSpec,
    eps: f64,
) -> Result<Complex64> {
    let assembly = CriticalAssembly::new(spec, eps, 24, 20);
    let mut b: Vec<f64> = spec.nu.clone();
    b.push(0.0);
    let g2spec = MeijerGSpec::new(spec.nu.len(), 0, vec![], b)?;
    let nu0 = spec.nu[0];
    let tau = spec.tau;

    let mut bmax = f64::NEG_INFINITY;
    let mut v_data = Vec::with_capacity(assembly.v_nodes.len());
    for (j, &(v, w)) in assembly.v_nodes.iter().enumerate() {
        let logz = assembly.log_v[j] + eta.ln();
        let (g2, g2s, _e, _n) = g2spec.eval_scaled_logz(logz, 20)?;
        let pair_log = -nu0 * assembly.log_v[j];
        let l = tau * v + 0.5 * v * v + Complex64::new(g2s, 0.0) + pair_log;
        bmax = bmax.max(l.re + g2.norm().max(1e-300).ln());
        v_data.push((w, g2, l));
    }
    let vfold: Vec<Complex64> = v_data
        .iter()
        .map(|&(w, g2, l)| {
            let e = l - bmax;
            if e.re > -745.0 {
                w * g2 * e.exp()
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();

    let mut amax = f64::NEG_INFINITY;
    let mut acc = Vec::with_capacity(assembly.u_nodes.len());
    for &(u, _) in &assembly.u_nodes {
        let (g1, g1s) = g1_scaled(spec, Complex64::new(u * xi, 0.0))?;
        let a = nu0 * u.ln() - tau * u - 0.5 * u * u + g1s;
        amax = amax.max(a);
        acc.push((g1, a));
    }
    let mut total = DdC::ZERO;
    for (i, &(u, w)) in assembly.u_nodes.iter().enumerate() {
        let (g1, a) = acc[i];
        let ea = a - amax;
        if ea < -745.0 {
            continue;
        }
        let mut inner = Complex64::new(0.0, 0.0);
        for (j, &(v, _)) in assembly.v_nodes.iter().enumerate() {
            inner += vfold[j] / (u - v);
        }
        total = total.add(DdC::from(inner * g1 * (w * ea.exp())));
    }
    Ok(total.to_c64() * (amax + bmax).exp() / Complex64::new(0.0, 2.0 * PI))
}
