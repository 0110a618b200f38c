//! Finite-N correlation kernels for the product ensembles.
//!
//! The kernel is a double contour integral: the outer variable runs on the
//! positive half-line, the inner one on circles enclosing the negated source
//! eigenvalues. Everything is assembled in log space so that source values
//! of size O(N) and the resulting rank-N pole powers stay representable, and
//! the inner circles are sized close to the saddle |v + a| ~ N, which keeps
//! the quadrature well-conditioned at large N.

use crate::contour::{ContourSpec, HalfLineMap, KernelResult, PathKind};
use crate::dd::DdC;
use crate::error::{Error, Result};
use crate::specfun::{complex_gamma, hyp0f1, hyp1f1, laguerre, ln_gamma_real_pos, log_gamma};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnsembleKind {
    Ginibre,
    TruncatedUnitary,
}

/// Full description of one product ensemble.
#[derive(Clone, Debug)]
pub struct EnsembleSpec {
    pub n: usize,
    pub r: usize,
    pub nu: Vec<f64>,
    pub kind: EnsembleKind,
    pub mu: Vec<f64>,
    /// How many of the mu parameters stay finite in scaling limits.
    pub q: usize,
    /// Source eigenvalues, sorted descending.
    pub source: Vec<f64>,
}

impl EnsembleSpec {
    pub fn ginibre(n: usize, nu: Vec<f64>, source: Vec<f64>) -> Result<Self> {
        Self::build(n, nu, EnsembleKind::Ginibre, vec![], 0, source)
    }

    pub fn truncated_unitary(
        n: usize,
        nu: Vec<f64>,
        mu: Vec<f64>,
        source: Vec<f64>,
    ) -> Result<Self> {
        let q = mu.len();
        Self::build(n, nu, EnsembleKind::TruncatedUnitary, mu, q, source)
    }

    fn build(
        n: usize,
        nu: Vec<f64>,
        kind: EnsembleKind,
        mu: Vec<f64>,
        q: usize,
        mut source: Vec<f64>,
    ) -> Result<Self> {
        if n == 0 || nu.is_empty() {
            return Err(Error::SpecShape("need n >= 1 and at least nu_0".into()));
        }
        let r = nu.len() - 1;
        if nu.iter().any(|&v| v <= -1.0) {
            return Err(Error::SpecShape("every nu must exceed -1".into()));
        }
        if kind == EnsembleKind::TruncatedUnitary {
            if mu.len() != r {
                return Err(Error::SpecShape(format!(
                    "truncated unitary needs {} mu values, got {}",
                    r,
                    mu.len()
                )));
            }
            for (l, (&m, &v)) in mu.iter().zip(nu.iter().skip(1)).enumerate() {
                if m <= v {
                    return Err(Error::SpecShape(format!(
                        "mu_{} = {} must exceed nu_{} = {}",
                        l + 1,
                        m,
                        l + 1,
                        v
                    )));
                }
            }
        }
        if q > r {
            return Err(Error::SpecShape("q must satisfy 0 <= q <= r".into()));
        }
        if source.len() != n {
            return Err(Error::SpecShape(format!(
                "need {} source eigenvalues, got {}",
                n,
                source.len()
            )));
        }
        if source.iter().any(|&a| a < 0.0) {
            return Err(Error::SpecShape("source eigenvalues must be >= 0".into()));
        }
        source.sort_by(|x, y| y.partial_cmp(x).unwrap());
        Ok(EnsembleSpec { n, r, nu, kind, mu, q, source })
    }

    pub fn with_q(mut self, q: usize) -> Result<Self> {
        if q > self.r {
            return Err(Error::SpecShape("q must satisfy 0 <= q <= r".into()));
        }
        self.q = q;
        Ok(self)
    }

    /// Canonical text form (sorted key=value lines); runs are identified by
    /// a content hash of this.
    pub fn canonical_text(&self) -> String {
        let fmt_vec =
            |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",");
        let kind = match self.kind {
            EnsembleKind::Ginibre => "ginibre",
            EnsembleKind::TruncatedUnitary => "truncated_unitary",
        };
        format!(
            "kind={}\nmu={}\nn={}\nnu={}\nq={}\nr={}\nsource={}\n",
            kind,
            fmt_vec(&self.mu),
            self.n,
            fmt_vec(&self.nu),
            self.q,
            self.r,
            fmt_vec(&self.source)
        )
    }
}

// ---------------------------------------------------------------------------
// auxiliary functions
// ---------------------------------------------------------------------------

/// phi(v; s) = Gamma(nu0+s)/Gamma(nu0+1) 1F1(nu0+s; nu0+1; -v).
pub fn little_phi(v: Complex64, s: Complex64, nu0: f64) -> Result<Complex64> {
    let a = nu0 + s;
    if a.im == 0.0 && a.re <= 0.0 && a.re == a.re.round() {
        return Err(Error::ParameterPole(format!(
            "nu0 + s = {} is a non-positive integer",
            a.re
        )));
    }
    let lg = log_gamma(a)? - ln_gamma_real_pos(nu0 + 1.0);
    Ok(lg.exp() * hyp1f1(a, nu0 + 1.0, -v)?)
}

/// log of phi(v; s), assembled without intermediate overflow.
fn log_little_phi(v: Complex64, s: Complex64, nu0: f64) -> Result<Complex64> {
    let a = nu0 + s;
    let lg = log_gamma(a)? - ln_gamma_real_pos(nu0 + 1.0);
    let f = hyp1f1(a, nu0 + 1.0, -v)?;
    Ok(lg + f.ln())
}

/// Psi(u; x): closed 0F1 form at r = 0, an r-fold loop integral otherwise.
/// Returns (mantissa, log_scale) with Psi = mantissa * exp(log_scale).
pub fn psi_scaled(u: Complex64, x: f64, spec: &EnsembleSpec) -> Result<(Complex64, f64)> {
    if spec.kind != EnsembleKind::Ginibre {
        return Err(Error::SpecShape("psi is the Ginibre-side function".into()));
    }
    psi_scaled_params(u, x, &spec.nu)
}

pub(crate) fn psi_scaled_params(
    u: Complex64,
    x: f64,
    nu: &[f64],
) -> Result<(Complex64, f64)> {
    let nu0 = nu[0];
    let lg0 = ln_gamma_real_pos(nu0 + 1.0);
    if nu.len() == 1 {
        let f = hyp0f1(nu0 + 1.0, -u * x)?;
        let m = f.norm().max(1e-300);
        return Ok((f / m, x - lg0 + m.ln()));
    }
    // r-fold loop around the negative axis, one Hankel loop per factor,
    // radius at the saddle x^{1/(r+1)}
    let r = nu.len() - 1;
    let delta = (0.75f64).max(x.powf(1.0 / (r as f64 + 1.0)));
    if r == 1 && u.im == 0.0 {
        // conjugate symmetry: the loop integral is 2i Im of its upper half
        let nodes = upper_half_loop(delta, 16);
        let mut entries: Vec<(Complex64, Complex64)> = Vec::with_capacity(nodes.len());
        let mut mx = f64::NEG_INFINITY;
        for &(w, wt) in &nodes {
            let f = hyp0f1(nu0 + 1.0, -u * x / w)?;
            let lv = w - (nu[1] + 1.0) * w.ln() + x / w + f.ln() - lg0;
            mx = mx.max(lv.re);
            entries.push((wt, lv));
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for (wt, lv) in &entries {
            let e = lv - mx;
            if e.re > -745.0 {
                sum += wt * e.exp();
            }
        }
        // (1/2 pi i) * 2 i Im(S) = Im(S)/pi
        return Ok((Complex64::new(sum.im / PI, 0.0), mx));
    }
    let loop_spec = ContourSpec::new(PathKind::HankelLoop {
        shift: 0.0,
        vertex_radius: delta,
        arm_angle: 3.0 * PI / 4.0,
        arm_len: 60.0,
    })
    .with_order(20, 10);
    let nodes = loop_spec.nodes();

    // recursive tensor over the r loops; for the common r = 1 one pass
    let mut entries: Vec<(Complex64, Complex64)> = Vec::new();
    let mut idx = vec![0usize; r];
    'outer: loop {
        let mut weight = Complex64::new(1.0, 0.0);
        let mut lw = Complex64::new(0.0, 0.0);
        let mut wprod = Complex64::new(1.0, 0.0);
        for (l, &i) in idx.iter().enumerate() {
            let (w, wt) = nodes[i];
            weight *= wt / Complex64::new(0.0, 2.0 * PI);
            lw += w - (nu[l + 1] + 1.0) * w.ln();
            wprod *= w;
        }
        let f = hyp0f1(nu0 + 1.0, -u * x / wprod)?;
        let lv = lw + x / wprod + f.ln() - lg0;
        entries.push((weight, lv));
        // advance multi-index
        for k in 0..r {
            idx[k] += 1;
            if idx[k] < nodes.len() {
                continue 'outer;
            }
            idx[k] = 0;
        }
        break;
    }
    let mx = entries.iter().map(|e| e.1.re).fold(f64::NEG_INFINITY, f64::max);
    let mut sum = Complex64::new(0.0, 0.0);
    for (w, l) in &entries {
        let e = l - mx;
        if e.re > -745.0 {
            sum += w * e.exp();
        }
    }
    Ok((sum, mx))
}

/// Psi(u; x) as a plain value.
pub fn psi(u: Complex64, x: f64, spec: &EnsembleSpec) -> Result<Complex64> {
    let (m, s) = psi_scaled(u, x, spec)?;
    Ok(m * s.exp())
}

/// Phi(v; y): closed 0F1 form at r = 0, Mellin-Barnes line otherwise.
/// Returns (mantissa, log_scale).
pub fn phi_scaled(v: Complex64, y: f64, spec: &EnsembleSpec) -> Result<(Complex64, f64)> {
    phi_q_scaled_params(v, y, &spec.nu, &[])
}

/// Phi(v; y) as a plain value (Ginibre chain).
pub fn phi_fn(v: Complex64, y: f64, spec: &EnsembleSpec) -> Result<Complex64> {
    let (m, s) = phi_scaled(v, y, spec)?;
    Ok(m * s.exp())
}

/// Phi_q(v; y) for the truncated-unitary chain: the reciprocal Gamma factors
/// use the first `spec.q` mu values.
pub fn phi_q(v: Complex64, y: f64, spec: &EnsembleSpec) -> Result<Complex64> {
    if spec.kind != EnsembleKind::TruncatedUnitary {
        return Err(Error::SpecShape("phi_q needs a truncated-unitary spec".into()));
    }
    let (m, s) = phi_q_scaled_params(v, y, &spec.nu, &spec.mu[..spec.q])?;
    Ok(m * s.exp())
}

pub(crate) fn phi_q_scaled_params(
    v: Complex64,
    y: f64,
    nu: &[f64],
    mus: &[f64],
) -> Result<(Complex64, f64)> {
    let nu0 = nu[0];
    if nu.len() == 1 && mus.is_empty() {
        // y^{nu0} e^{-y} 0F1(nu0+1; -v y) / Gamma(nu0+1)
        let f = hyp0f1(nu0 + 1.0, -v * y)?;
        let m = f.norm().max(1e-300);
        let ls = nu0 * y.ln() - y - ln_gamma_real_pos(nu0 + 1.0) + m.ln();
        return Ok((f / m, ls));
    }
    let grid = PhiLineGrid::build(nu, mus, &[v], 24)?;
    Ok(grid.eval_scaled(0, y))
}

/// Psi_q(u; x) for the truncated-unitary chain, by the single-contour form:
/// a keyhole around the non-positive integers kept right of Re w = min mu + 1.
pub fn psi_q(u: Complex64, x: f64, spec: &EnsembleSpec) -> Result<Complex64> {
    if spec.kind != EnsembleKind::TruncatedUnitary {
        return Err(Error::SpecShape("psi_q needs a truncated-unitary spec".into()));
    }
    let (m, s) = psi_q_scaled_params(u, x, &spec.nu, &spec.mu[..spec.q])?;
    Ok(m * s.exp())
}

pub(crate) fn psi_q_scaled_params(
    u: Complex64,
    x: f64,
    nu: &[f64],
    mus: &[f64],
) -> Result<(Complex64, f64)> {
    let nu0 = nu[0];
    let right_edge = 0.45f64;
    if let Some(mu_min) = mus.iter().cloned().reduce(f64::min) {
        if mu_min + 1.0 <= right_edge {
            return Err(Error::ContourConflict(format!(
                "keyhole needs Re w < {}, below its right edge",
                mu_min + 1.0
            )));
        }
    }
    // truncation: residues scale like
    // x^k/k! * prod Gamma(mu+1+k)/Gamma(nu+1+k) * (1+|u|)^k
    let growth = x * (1.0 + u.norm());
    let mut kmax = 12usize;
    let mut log_term = 0.0f64;
    let mut log_max = 0.0f64;
    for k in 1..200 {
        let kf = k as f64;
        let mut ratio = growth / kf;
        for &m in mus {
            ratio *= m + kf;
        }
        for &nv in &nu[1..] {
            ratio /= nv + kf;
        }
        log_term += ratio.abs().ln();
        log_max = log_max.max(log_term);
        kmax = k;
        if log_term < log_max - 46.0 {
            break;
        }
    }
    let path = ContourSpec::keyhole(-(kmax as f64) - 0.5, right_edge, 0.5)
        .with_order(20, kmax.clamp(8, 200));
    let logx = Complex64::new(x.ln(), PI); // any fixed branch of log(-x)
    let lg0 = ln_gamma_real_pos(nu0 + 1.0);
    let mut entries: Vec<(Complex64, Complex64)> = Vec::new();
    for (w, wt) in path.nodes() {
        let mut l = -w * logx
            + log_gamma(w).map_err(|_| {
                Error::ContourConflict("keyhole node collided with a gamma pole".into())
            })?;
        for &m in mus {
            l += log_gamma(m + 1.0 - w)?;
        }
        for &nv in &nu[1..] {
            l -= log_gamma(nv + 1.0 - w)?;
        }
        let f = hyp1f1(w, nu0 + 1.0, u)?;
        l += f.ln() - lg0;
        entries.push((wt / Complex64::new(0.0, 2.0 * PI), l));
    }
    let mx = entries.iter().map(|e| e.1.re).fold(f64::NEG_INFINITY, f64::max);
    let mut sum = Complex64::new(0.0, 0.0);
    for (w, l) in &entries {
        let e = l - mx;
        if e.re > -745.0 {
            sum += w * e.exp();
        }
    }
    Ok((sum, mx))
}

/// Residue-series form of Psi_q (term-by-term integration), an independent
/// cross-check of the contour evaluation.
pub fn psi_q_series(
    u: Complex64,
    x: f64,
    spec: &EnsembleSpec,
    terms: usize,
) -> Result<Complex64> {
    let nu0 = spec.nu[0];
    let mut sum = DdC::ZERO;
    let mut log_fact = 0.0f64;
    for k in 0..terms {
        let kf = k as f64;
        if k > 0 {
            log_fact += kf.ln();
        }
        let mut lg = kf * x.ln() - log_fact;
        for &m in &spec.mu[..spec.q] {
            lg += ln_gamma_real_pos(m + 1.0 + kf);
        }
        for &nv in &spec.nu[1..] {
            lg -= ln_gamma_real_pos(nv + 1.0 + kf);
        }
        let f = hyp1f1(Complex64::new(-kf, 0.0), nu0 + 1.0, u)?;
        sum = sum.add(DdC::from(f * lg.exp()));
    }
    Ok(sum.to_c64() / complex_gamma(Complex64::new(nu0 + 1.0, 0.0))?)
}


/// Upper half of the Hankel loop (vertex arc plus one arm), traversed
/// outward from the positive real axis.
fn upper_half_loop(delta: f64, order: usize) -> Vec<(Complex64, Complex64)> {
    use crate::contour::gauss_legendre;
    let (xs, ws) = gauss_legendre(order);
    let theta = 3.0 * PI / 4.0;
    let mut nodes = Vec::new();
    // arc phi in [0, theta]
    let arc_panels = 4usize;
    for k in 0..arc_panels {
        let a = theta * k as f64 / arc_panels as f64;
        let b = theta * (k + 1) as f64 / arc_panels as f64;
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for (x, w) in xs.iter().zip(ws.iter()) {
            let phi = mid + half * x;
            let z = Complex64::from_polar(delta, phi);
            nodes.push((z, Complex64::new(0.0, 1.0) * z * (w * half)));
        }
    }
    // arm t in [0, L], direction e^{i theta}; graded panels resolve the
    // vertex-scale variation of w^{-nu-1}
    let dir = Complex64::from_polar(1.0, theta);
    let z0 = Complex64::from_polar(delta, theta);
    let breaks = [0.0, 0.75, 1.5, 3.0, 6.0, 12.0, 22.0, 36.0, 50.0, 65.0];
    for win in breaks.windows(2) {
        let mid = 0.5 * (win[0] + win[1]);
        let half = 0.5 * (win[1] - win[0]);
        for (x, w) in xs.iter().zip(ws.iter()) {
            let t = mid + half * x;
            nodes.push((z0 + dir * t, dir * (w * half)));
        }
    }
    nodes
}

// ---------------------------------------------------------------------------
// Mellin-Barnes line grid for Phi, shared across v nodes and y arguments
// ---------------------------------------------------------------------------

pub(crate) struct PhiLineGrid {
    /// s nodes and quadrature weights (including 1/(2 pi i))
    s_nodes: Vec<(Complex64, Complex64)>,
    /// per v-node, per s-node: log of phi(v;s) prod Gamma(nu_l+s) / prod Gamma(mu_l+s)
    logs: Vec<Vec<Complex64>>,
}

impl PhiLineGrid {
    pub(crate) fn build(nu: &[f64], mus: &[f64], vs: &[Complex64], order: usize) -> Result<Self> {
        let min_nu = nu.iter().cloned().fold(f64::INFINITY, f64::min);
        let c = -min_nu + 0.75;
        let nu0 = nu[0];
        let log_gamma_part = |s: Complex64| -> Result<Complex64> {
            let mut l = Complex64::new(0.0, 0.0);
            for &nv in &nu[1..] {
                l += log_gamma(nv + s)?;
            }
            for &m in mus {
                l -= log_gamma(m + s)?;
            }
            Ok(l)
        };
        // walk the line outward; the t-decay criterion uses the v-maximized
        // integrand (the argument y only rescales by y^{-c})
        let probe = |t: f64| -> f64 {
            let s = Complex64::new(c, t);
            let base = match log_gamma_part(s) {
                Ok(l) => l.re,
                Err(_) => return f64::NEG_INFINITY,
            };
            vs.iter()
                .map(|&v| match log_little_phi(v, s, nu0) {
                    Ok(l) => base + l.re,
                    Err(_) => f64::NEG_INFINITY,
                })
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let mut hi = 6.0f64;
        let mut mx = probe(0.0).max(probe(3.0)).max(probe(-3.0));
        for _ in 0..60 {
            let m = probe(hi).max(probe(-hi));
            mx = mx.max(m);
            if m < mx - 40.0 {
                break;
            }
            hi += 4.0;
        }
        let spec_line = ContourSpec::vertical_line(c, hi)
            .with_order(order, (hi.ceil() as usize).max(12));
        let s_nodes: Vec<(Complex64, Complex64)> = spec_line
            .nodes()
            .into_iter()
            .map(|(s, w)| (s, w / Complex64::new(0.0, 2.0 * PI)))
            .collect();
        let mut logs = Vec::with_capacity(vs.len());
        for &v in vs {
            let mut row = Vec::with_capacity(s_nodes.len());
            for &(s, _) in &s_nodes {
                row.push(log_gamma_part(s)? + log_little_phi(v, s, nu0)?);
            }
            logs.push(row);
        }
        Ok(PhiLineGrid { s_nodes, logs })
    }

    /// Phi-type value for v-node `vi` at argument y, as (mantissa, log_scale).
    pub(crate) fn eval_scaled(&self, vi: usize, y: f64) -> (Complex64, f64) {
        let ln_y = y.ln();
        let row = &self.logs[vi];
        let mut mx = f64::NEG_INFINITY;
        for (k, &(s, _)) in self.s_nodes.iter().enumerate() {
            mx = mx.max(row[k].re - s.re * ln_y);
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for (k, &(s, w)) in self.s_nodes.iter().enumerate() {
            let e = row[k] - s * ln_y - mx;
            if e.re > -745.0 {
                sum += w * e.exp();
            }
        }
        (sum, mx)
    }
}

// ---------------------------------------------------------------------------
// the double-contour kernel evaluator
// ---------------------------------------------------------------------------

/// Distinct source values with multiplicities (source sorted descending).
fn source_groups(source: &[f64]) -> Vec<(f64, usize)> {
    let mut groups: Vec<(f64, usize)> = Vec::new();
    for &a in source {
        if let Some(last) = groups.last_mut() {
            if (last.0 - a).abs() < 1e-12 {
                last.1 += 1;
                continue;
            }
        }
        groups.push((a, 1));
    }
    groups
}

/// Epsilon shift for the null-source prescription.
const NULL_EPS: f64 = 1e-6;

/// One small circle around the origin pole, tied to a single u node: with
/// null sources the inner contour must separate v = 0 from that u, so its
/// radius shrinks with u. Everything else stays on the fixed circles.
struct Ring {
    nodes: Vec<(Complex64, Complex64)>,
    exps: Vec<Complex64>,
    offset: usize, // row offset into the Phi value table
}

/// Cached outer column of the kernel evaluator.
pub struct PsiProfile {
    vals: Vec<Complex64>,
    scales: Vec<f64>,
}

/// One set of inner-circle nodes tied to a u range: for clusters of many
/// equal sources the contour saddle sits at |v + a| ~ N, reachable only
/// when the nearby u nodes allow it, so the circle grows with u.
struct VBucket {
    u_hi: f64,
    nodes: Vec<(Complex64, Complex64)>,
    exps: Vec<Complex64>,
    offset: usize,
}

/// Reusable kernel evaluator: all spec-dependent quadrature data is built
/// once, each (x, y) evaluation is a weighted double sum.
pub struct KernelEvaluator {
    spec: EnsembleSpec,
    u_nodes: Vec<(f64, f64)>,             // (u, real weight)
    u_exponent: Vec<f64>,                 // ln|w| + nu0 ln u - u + sum n_g ln(u+a_g)
    v_nodes: Vec<(Complex64, Complex64)>, // shared fixed circles: (v, weight)
    v_exponent: Vec<Complex64>,           // v - sum n_g Log(v+a_g)
    v_buckets: Vec<VBucket>,              // u-graded circles for a heavy cluster
    rings: Vec<Ring>,                     // per-u rings when a zero source exists
    all_v: Vec<Complex64>,                // fixed, bucket, then ring v's
    phi_grid: Option<PhiLineGrid>,        // r >= 1 (or unitary) machinery
    u_lo: f64,
}

impl KernelEvaluator {
    pub fn new(spec: &EnsembleSpec) -> Result<Self> {
        Self::with_shift(spec, NULL_EPS, 1.0)
    }

    /// `eps` is the null-source shift; `refine` scales quadrature density.
    pub fn with_shift(spec: &EnsembleSpec, eps: f64, refine: f64) -> Result<Self> {
        let groups = source_groups(&spec.source);
        let has_zero = spec.source.last().map(|&a| a == 0.0).unwrap_or(false);
        let nu0 = spec.nu[0];

        // ---- u path ----
        let u_lo = if has_zero { eps } else { 0.0 };
        let g = |u: f64| -> f64 {
            let mut s = -u + nu0 * u.ln();
            for &(a, n) in &groups {
                s += n as f64 * (u + a).ln();
            }
            s
        };
        let mut gmax = f64::NEG_INFINITY;
        let mut u = u_lo.max(1e-4);
        while u < 1e5 {
            gmax = gmax.max(g(u));
            u *= 1.15;
        }
        let mut u_hi = u_lo.max(1e-4);
        u = u_lo.max(1e-4);
        while u < 1e5 {
            if g(u) > gmax - 46.0 {
                u_hi = u;
            }
            u *= 1.15;
        }
        let u_hi = (u_hi * 1.3).max(u_lo + 10.0);

        let order = ((16.0 * refine).round() as usize).max(8);
        let map = if u_lo > 0.0 {
            HalfLineMap::Geometric
        } else if nu0 == nu0.round() && nu0 >= 0.0 {
            HalfLineMap::Exponential
        } else {
            HalfLineMap::Power((2.0f64).max((3.0 / (nu0 + 1.0)).ceil()) as u32)
        };
        let start = if u_lo > 0.0 { u_lo } else { 0.0 };
        let panels = ((14.0 * refine).round() as usize).max(8);
        let u_spec = ContourSpec::new(PathKind::HalfLine { start, cutoff: u_hi, map })
            .with_order(order, panels);
        let u_nodes: Vec<(f64, f64)> =
            u_spec.nodes().into_iter().map(|(z, w)| (z.re, w.re)).collect();

        // ---- v contours: one circle per positive source cluster; the zero
        // group (if any) is handled by per-u rings below ----
        let zero_mult = groups
            .iter()
            .find(|&&(a, _)| a == 0.0)
            .map(|&(_, n)| n)
            .unwrap_or(0);
        // clusters ascending in a, positive sources only
        let mut clusters: Vec<(f64, f64, usize)> = Vec::new();
        for &(a, n) in groups.iter().rev() {
            if a == 0.0 {
                continue;
            }
            if let Some(last) = clusters.last_mut() {
                if a - last.1 < 1.5 + 0.05 * a {
                    last.1 = a;
                    last.2 += n;
                    continue;
                }
            }
            clusters.push((a, a, n));
        }

        let first_u_node = u_nodes.first().map(|&(u, _)| u).unwrap_or(0.1);
        let u_top = u_nodes.last().map(|&(u, _)| u).unwrap_or(1.0);

        // decide whether the heaviest cluster needs u-graded circles: the
        // saddle radius is ~N but a single circle is capped by the smallest
        // u node, which costs ~exp(N ln(saddle/cap)) digits at the u hump
        let mut bucket_cluster: Option<usize> = None;
        if !clusters.is_empty() {
            let (ci_max, &(lo_c, hi_c, mult)) = clusters
                .iter()
                .enumerate()
                .max_by_key(|(_, &(_, _, m))| m)
                .unwrap();
            let u_hump = (spec.n as f64 - lo_c).max(first_u_node);
            let r_star = (spec.n as f64).min(u_hump + lo_c);
            let rho_single = (lo_c - 0.3).max(0.25 + (hi_c - lo_c) / 2.0);
            let cond_exp = mult as f64 * (r_star / rho_single).max(1.0).ln();
            if mult >= 16 && cond_exp > 10.0 {
                bucket_cluster = Some(ci_max);
            }
        }

        let mut v_circles: Vec<ContourSpec> = Vec::new();
        for (ci, &(lo, hi, mult)) in clusters.iter().enumerate() {
            if bucket_cluster == Some(ci) {
                continue;
            }
            // the circle must contain [-hi, -lo], keep clear of the
            // neighbouring cluster and of the u nodes on the right
            let right_cap = if ci == 0 {
                (-0.3f64).min(-0.03 * lo).max(-lo * 0.5)
            } else {
                let prev_hi = clusters[ci - 1].1; // smaller a
                let gap = lo - prev_hi;
                -prev_hi - 0.15 * gap
            };
            let left_cap = if ci + 1 < clusters.len() {
                let gap = clusters[ci + 1].0 - hi;
                -hi - 0.85 * gap
            } else {
                f64::NEG_INFINITY
            };
            // centered circle, radius near the saddle |v + a| ~ multiplicity
            let mid = -0.5 * (hi + lo);
            let desired = ((spec.n - mult) as f64 + mult as f64)
                .max(0.25 + (hi - lo) / 2.0);
            let max_right = right_cap - mid;
            let max_left = if left_cap.is_finite() { mid - left_cap } else { f64::INFINITY };
            let radius = desired
                .min(max_right)
                .min(max_left)
                .max(0.25 + (hi - lo) / 2.0);
            if radius > max_right || !radius.is_finite() {
                return Err(Error::ContourConflict(format!(
                    "no admissible circle around sources in [{lo}, {hi}]"
                )));
            }
            let center = Complex64::new(mid, 0.0);
            if lo > 0.0 && center.re + radius >= first_u_node.max(0.0) {
                return Err(Error::ContourConflict(
                    "source circle would swallow the first u node".into(),
                ));
            }
            let v_panels = (((8 + mult / 2) as f64 * refine).round() as usize).clamp(8, 64);
            v_circles.push(ContourSpec::circle(center, radius).with_order(order, v_panels));
        }

        let mut v_nodes: Vec<(Complex64, Complex64)> = Vec::new();
        for cspec in &v_circles {
            v_nodes.extend(cspec.nodes());
        }

        let v_exp_of = |v: Complex64| -> Complex64 {
            let mut e = v;
            for &(a, n) in &groups {
                e -= n as f64 * (v + a).ln();
            }
            e
        };

        // ---- u-graded circles for the heavy cluster ----
        let mut bucket_plan: Vec<(f64, ContourSpec)> = Vec::new(); // (u_hi, circle)
        if let Some(ci) = bucket_cluster {
            let (lo, hi, _mult) = clusters[ci];
            // the right cap from the neighbouring cluster (those sit at
            // smaller a, i.e. to the right on the v axis)
            let neighbour_cap = if ci > 0 {
                let prev_hi = clusters[ci - 1].1;
                let gap = lo - prev_hi;
                -prev_hi - 0.15 * gap
            } else {
                f64::INFINITY
            };
            let mut u_edges = vec![0.0f64];
            while *u_edges.last().unwrap() < u_top {
                let u = *u_edges.last().unwrap();
                u_edges.push((u * 1.07 + 0.25 * lo).max(u + 0.5));
            }
            let desired = (spec.n as f64).max(0.25 + (hi - lo) / 2.0);
            for win in u_edges.windows(2) {
                let u_lo_b = win[0];
                // right edge strictly left of every u in this bucket
                let right_edge = if u_lo_b <= first_u_node {
                    (-0.3f64).min(-0.03 * lo).max(-lo * 0.5)
                } else {
                    0.85 * u_lo_b
                }
                .min(neighbour_cap);
                let mid = -0.5 * (hi + lo);
                let max_right = right_edge - mid;
                let radius = desired
                    .min(max_right)
                    .max(0.25 + (hi - lo) / 2.0);
                if radius > max_right || !radius.is_finite() {
                    return Err(Error::ContourConflict(format!(
                        "no admissible bucket circle around sources in [{lo}, {hi}]"
                    )));
                }
                let v_panels =
                    (((10.0 + 0.5 * radius) * refine).round() as usize).clamp(12, 44);
                let cspec = ContourSpec::circle(Complex64::new(mid, 0.0), radius)
                    .with_order(order, v_panels);
                bucket_plan.push((win[1], cspec));
            }
        }

        // ---- exponents ----
        let mut u_exponent = Vec::with_capacity(u_nodes.len());
        for &(u, w) in &u_nodes {
            let mut e = w.abs().ln() + nu0 * u.ln() - u;
            for &(a, n) in &groups {
                e += n as f64 * (u + a).ln();
            }
            u_exponent.push(e);
        }
        let v_exponent: Vec<Complex64> = v_nodes.iter().map(|&(v, _)| v_exp_of(v)).collect();

        let mut v_buckets: Vec<VBucket> = Vec::new();
        let mut all_v: Vec<Complex64> = v_nodes.iter().map(|&(v, _)| v).collect();
        for (u_hi, cspec) in &bucket_plan {
            let nodes = cspec.nodes();
            let exps: Vec<Complex64> = nodes.iter().map(|&(v, _)| v_exp_of(v)).collect();
            let offset = all_v.len();
            all_v.extend(nodes.iter().map(|&(v, _)| v));
            v_buckets.push(VBucket { u_hi: *u_hi, nodes, exps, offset });
        }

        // ---- per-u rings for the zero group ----
        let mut rings: Vec<Ring> = Vec::new();
        if zero_mult > 0 {
            let min_pos = clusters.first().map(|&(lo, _, _)| lo).unwrap_or(f64::INFINITY);
            let ring_order = ((16.0 * refine).round() as usize).max(12);
            for &(u, _) in &u_nodes {
                let rho = (0.3 * u).min(0.35 * min_pos).min(1.0);
                let ring = ContourSpec::circle(Complex64::new(0.0, 0.0), rho)
                    .with_order(ring_order, 2 + zero_mult / 2);
                let nodes = ring.nodes();
                let exps: Vec<Complex64> = nodes.iter().map(|&(v, _)| v_exp_of(v)).collect();
                let offset = all_v.len();
                all_v.extend(nodes.iter().map(|&(v, _)| v));
                rings.push(Ring { nodes, exps, offset });
            }
        }

        // ---- Phi machinery ----
        let needs_grid = spec.r >= 1 || spec.kind == EnsembleKind::TruncatedUnitary;
        let phi_grid = if needs_grid {
            let mus: &[f64] = if spec.kind == EnsembleKind::TruncatedUnitary {
                &spec.mu
            } else {
                &[]
            };
            Some(PhiLineGrid::build(&spec.nu, mus, &all_v, 20)?)
        } else {
            None
        };

        Ok(KernelEvaluator {
            spec: spec.clone(),
            u_nodes,
            u_exponent,
            v_nodes,
            v_exponent,
            v_buckets,
            rings,
            all_v,
            phi_grid,
            u_lo,
        })
    }

    fn psi_column(&self, x: f64) -> Result<(Vec<Complex64>, Vec<f64>)> {
        let mut vals = Vec::with_capacity(self.u_nodes.len());
        let mut scales = Vec::with_capacity(self.u_nodes.len());
        match self.spec.kind {
            EnsembleKind::Ginibre => {
                for &(u, _) in &self.u_nodes {
                    let (m, s) =
                        psi_scaled_params(Complex64::new(u, 0.0), x, &self.spec.nu)?;
                    vals.push(m);
                    scales.push(s);
                }
            }
            EnsembleKind::TruncatedUnitary => {
                for &(u, _) in &self.u_nodes {
                    let (m, s) = psi_q_scaled_params(
                        Complex64::new(u, 0.0),
                        x,
                        &self.spec.nu,
                        &self.spec.mu,
                    )?;
                    vals.push(m);
                    scales.push(s);
                }
            }
        }
        Ok((vals, scales))
    }

    /// Phi values over every inner node (fixed circles first, then rings).
    fn phi_column(&self, y: f64) -> Result<(Vec<Complex64>, Vec<f64>)> {
        let n_all = self.all_v.len();
        let mut vals = Vec::with_capacity(n_all);
        let mut scales = Vec::with_capacity(n_all);
        if let Some(grid) = &self.phi_grid {
            for vi in 0..n_all {
                let (m, s) = grid.eval_scaled(vi, y);
                vals.push(m);
                scales.push(s);
            }
        } else {
            // r = 0 Ginibre closed form
            let nu0 = self.spec.nu[0];
            let lg0 = ln_gamma_real_pos(nu0 + 1.0);
            for &v in &self.all_v {
                let f = hyp0f1(nu0 + 1.0, -v * y)?;
                let m = f.norm().max(1e-300);
                vals.push(f / m);
                scales.push(nu0 * y.ln() - y - lg0 + m.ln());
            }
        }
        Ok((vals, scales))
    }

    /// K_N(x, y) as a bare value.
    pub fn eval(&self, x: f64, y: f64) -> Result<Complex64> {
        let (psi_m, psi_s) = self.psi_column(x)?;
        let (phi_m, phi_s) = self.phi_column(y)?;
        Ok(self.assemble(&psi_m, &psi_s, &phi_m, &phi_s))
    }

    /// Precomputed outer column for one x, reusable across many y.
    pub fn psi_profile(&self, x: f64) -> Result<PsiProfile> {
        let (vals, scales) = self.psi_column(x)?;
        Ok(PsiProfile { vals, scales })
    }

    /// K_N(x, y) with the outer column reused.
    pub fn eval_with_profile(&self, profile: &PsiProfile, y: f64) -> Result<Complex64> {
        let (phi_m, phi_s) = self.phi_column(y)?;
        Ok(self.assemble(&profile.vals, &profile.scales, &phi_m, &phi_s))
    }

    fn assemble(
        &self,
        psi_m: &[Complex64],
        psi_s: &[f64],
        phi_m: &[Complex64],
        phi_s: &[f64],
    ) -> Complex64 {
        let alpha: Vec<f64> =
            self.u_exponent.iter().zip(psi_s).map(|(a, s)| a + s).collect();
        let amax = alpha.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut bmax = f64::NEG_INFINITY;
        for (j, e) in self.v_exponent.iter().enumerate() {
            bmax = bmax.max(e.re + phi_s[j]);
        }
        for b in &self.v_buckets {
            for (k, e) in b.exps.iter().enumerate() {
                bmax = bmax.max(e.re + phi_s[b.offset + k]);
            }
        }
        for ring in &self.rings {
            for (k, e) in ring.exps.iter().enumerate() {
                bmax = bmax.max(e.re + phi_s[ring.offset + k]);
            }
        }

        // fixed-circle folded values
        let vfold: Vec<Complex64> = self
            .v_nodes
            .iter()
            .enumerate()
            .map(|(j, &(_, w))| {
                let e = self.v_exponent[j].re + phi_s[j] - bmax;
                if e > -745.0 {
                    let phase = Complex64::new(e, self.v_exponent[j].im);
                    w * phi_m[j] * phase.exp()
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();

        // fold the bucket circles too
        let bucket_folds: Vec<Vec<Complex64>> = self
            .v_buckets
            .iter()
            .map(|b| {
                b.nodes
                    .iter()
                    .enumerate()
                    .map(|(k, &(_, w))| {
                        let e = b.exps[k].re + phi_s[b.offset + k] - bmax;
                        if e > -745.0 {
                            let phase = Complex64::new(e, b.exps[k].im);
                            w * phi_m[b.offset + k] * phase.exp()
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    })
                    .collect()
            })
            .collect();

        let mut total = DdC::ZERO;
        let mut bucket_idx = 0usize;
        for (i, &(u, w)) in self.u_nodes.iter().enumerate() {
            let ea = alpha[i] - amax;
            if ea < -745.0 {
                continue;
            }
            let mut inner = Complex64::new(0.0, 0.0);
            for (j, &(v, _)) in self.v_nodes.iter().enumerate() {
                inner += vfold[j] / (u - v);
            }
            if !self.v_buckets.is_empty() {
                while bucket_idx + 1 < self.v_buckets.len()
                    && u >= self.v_buckets[bucket_idx].u_hi
                {
                    bucket_idx += 1;
                }
                let b = &self.v_buckets[bucket_idx];
                for (k, &(v, _)) in b.nodes.iter().enumerate() {
                    inner += bucket_folds[bucket_idx][k] / (u - v);
                }
            }
            if !self.rings.is_empty() {
                let ring = &self.rings[i];
                for (k, &(v, wv)) in ring.nodes.iter().enumerate() {
                    let e = ring.exps[k].re + phi_s[ring.offset + k] - bmax;
                    if e > -745.0 {
                        let phase = Complex64::new(e, ring.exps[k].im);
                        inner += wv * phi_m[ring.offset + k] * phase.exp() / (u - v);
                    }
                }
            }
            let sign = if w >= 0.0 { 1.0 } else { -1.0 };
            total = total.add(DdC::from(inner * (psi_m[i] * (sign * ea.exp()))));
        }
        total.to_c64() * (amax + bmax).exp() / Complex64::new(0.0, 2.0 * PI)
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn node_budget(&self) -> usize {
        self.u_nodes.len() * self.v_nodes.len()
    }

    pub fn u_cutoff(&self) -> f64 {
        self.u_nodes.last().map(|&(u, _)| u).unwrap_or(0.0)
    }

    pub fn u_lo(&self) -> f64 {
        self.u_lo
    }
}

/// K_N(x, y) with an error estimate from quadrature refinement (and from the
/// epsilon shift when null sources are present).
pub fn kernel_kn(x: f64, y: f64, spec: &EnsembleSpec) -> Result<KernelResult> {
    if x <= 0.0 || y <= 0.0 {
        return Err(Error::Domain("kernel arguments must be positive".into()));
    }
    let base = KernelEvaluator::new(spec)?;
    let v0 = base.eval(x, y)?;
    let fine = KernelEvaluator::with_shift(spec, NULL_EPS, 1.5)?;
    let v1 = fine.eval(x, y)?;
    let mut err = (v1 - v0).norm();
    let mut value = v1;
    let mut budget = base.node_budget() + fine.node_budget();
    let has_zero = spec.source.last().map(|&a| a == 0.0).unwrap_or(false);
    if has_zero {
        // the lower u cutoff biases the integral by O(eps^{1+nu0});
        // Richardson-extrapolate with that exponent and flag wild shifts
        let half = KernelEvaluator::with_shift(spec, NULL_EPS / 2.0, 1.5)?;
        let v2 = half.eval(x, y)?;
        budget += half.node_budget();
        let shift = (v2 - v1).norm();
        if shift > 0.05 * (1.0 + v1.norm()) {
            return Err(Error::EpsUnstable { shift, err });
        }
        let f = (0.5f64).powf(1.0 + spec.nu[0]);
        value = (v2 - v1 * f) / (1.0 - f);
        err += shift * f / (1.0 - f) * 0.5 + 1e-12 * value.norm();
    }
    Ok(KernelResult { value, err_estimate: err, node_budget: budget })
}

// ---------------------------------------------------------------------------
// biorthogonal-sum oracle
// ---------------------------------------------------------------------------

/// Moment matrix g_{i,j} = int_0^inf x^{i-1} xi_j(x) dx for the ensemble.
pub fn g_matrix(spec: &EnsembleSpec) -> Result<DMatrix<f64>> {
    let n = spec.n;
    let nu0 = spec.nu[0];
    let mut g = DMatrix::zeros(n, n);
    for i in 1..=n {
        let mut log_pre = ln_gamma_real_pos(i as f64); // (i-1)!
        match spec.kind {
            EnsembleKind::Ginibre => {
                for &nv in &spec.nu[1..] {
                    log_pre += ln_gamma_real_pos(nv + i as f64);
                }
            }
            EnsembleKind::TruncatedUnitary => {
                for (l, &nv) in spec.nu[1..].iter().enumerate() {
                    let m = spec.mu[l];
                    log_pre += ln_gamma_real_pos(nv + i as f64)
                        + ln_gamma_real_pos(m - nv)
                        - ln_gamma_real_pos(m + i as f64);
                }
            }
        }
        for (j, &a) in spec.source.iter().enumerate() {
            let lag = laguerre(i - 1, nu0, Complex64::new(-a, 0.0)).re;
            g[(i - 1, j)] = (log_pre + a).exp() * lag;
        }
    }
    Ok(g)
}

fn perturbed_spec(spec: &EnsembleSpec, delta: f64) -> EnsembleSpec {
    let mut s = spec.clone();
    for l in 1..s.source.len() {
        if (s.source[l] - s.source[l - 1]).abs() < delta * 0.5 {
            s.source[l] = s.source[l - 1] + delta;
        }
    }
    s.source.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

/// Biorthogonal-sum kernel: inverts the moment matrix directly. The
/// independent oracle for `kernel_kn` at small N (conditioning guard at
/// N = 12). Coincident sources are perturbed and Richardson-extrapolated.
pub fn kernel_kn_biortho(x: f64, y: f64, spec: &EnsembleSpec) -> Result<Complex64> {
    if spec.n > 12 {
        return Err(Error::SpecShape("biorthogonal oracle capped at N = 12".into()));
    }
    let has_coincident =
        spec.source.windows(2).any(|w| (w[0] - w[1]).abs() < 1e-12);
    if has_coincident {
        let d = 1e-7;
        let k1 = kernel_kn_biortho(x, y, &perturbed_spec(spec, d))?;
        let k2 = kernel_kn_biortho(x, y, &perturbed_spec(spec, d / 2.0))?;
        return Ok(2.0 * k2 - k1);
    }
    let g = g_matrix(spec)?;
    let norm_g = g.abs().column_sum().max();
    let inv = g
        .clone()
        .try_inverse()
        .ok_or(Error::IllConditioned { cond: f64::INFINITY })?;
    let cond = norm_g * inv.abs().column_sum().max();
    if cond > 1e12 {
        return Err(Error::IllConditioned { cond });
    }
    // K(x,y) = sum_j xi_j(y) * [g^{-1} eta-vec(x)]_j with eta_i = x^{i-1}
    let n = spec.n;
    let xs = DMatrix::from_fn(n, 1, |i, _| x.powi(i as i32));
    let p = &inv * xs;
    let mut k = Complex64::new(0.0, 0.0);
    for (j, &a) in spec.source.iter().enumerate() {
        let xi_j = match spec.kind {
            EnsembleKind::Ginibre => phi_fn(Complex64::new(-a, 0.0), y, spec)?,
            EnsembleKind::TruncatedUnitary => {
                // xi_j(y) = Phi_r(-a_j; y) * prod Gamma(mu_l - nu_l)
                let (m, s) = phi_q_scaled_params(
                    Complex64::new(-a, 0.0),
                    y,
                    &spec.nu,
                    &spec.mu,
                )?;
                let mut lg = 0.0;
                for (l, &nv) in spec.nu[1..].iter().enumerate() {
                    lg += ln_gamma_real_pos(spec.mu[l] - nv);
                }
                m * (s + lg).exp()
            }
        };
        k += xi_j * p[(j, 0)];
    }
    Ok(k)
}

/// k-point correlation determinant det[K_N(x_i, x_j)].
pub fn correlation_rho_k(points: &[f64], spec: &EnsembleSpec) -> Result<f64> {
    if points.iter().any(|&p| p <= 0.0) {
        return Err(Error::Domain("correlation points must be positive".into()));
    }
    let ev = KernelEvaluator::new(spec)?;
    correlation_rho_k_with(&ev, points)
}

/// As `correlation_rho_k`, reusing a prebuilt evaluator.
pub fn correlation_rho_k_with(ev: &KernelEvaluator, points: &[f64]) -> Result<f64> {
    let k = points.len();
    for i in 0..k {
        for j in (i + 1)..k {
            if (points[i] - points[j]).abs() < 1e-14 {
                return Err(Error::Domain("correlation points must be distinct".into()));
            }
        }
    }
    let mut m = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            m[(i, j)] = ev.eval(points[i], points[j])?.re;
        }
    }
    Ok(m.determinant())
}

// ---------------------------------------------------------------------------
// rank-m decomposition
// ---------------------------------------------------------------------------

/// Splits the kernel into the bulk part (the constant source tail collapsed
/// into a power) and m rank-one spike corrections; bulk + sum(spikes)
/// reproduces the full kernel.
pub fn quasi_decomposition(
    x: f64,
    y: f64,
    spec: &EnsembleSpec,
    m: usize,
) -> Result<(Complex64, Vec<Complex64>)> {
    if m >= spec.n {
        return Err(Error::SpecShape("need m < N".into()));
    }
    if spec.kind != EnsembleKind::Ginibre {
        return Err(Error::SpecShape(
            "the decomposition is implemented for the Ginibre chain".into(),
        ));
    }
    // identify the repeated tail value: exactly N - m copies of one value
    let groups = source_groups(&spec.source);
    if spec.source.last().map(|&a| a == 0.0).unwrap_or(false) {
        return Err(Error::SpecShape(
            "decomposition needs strictly positive sources".into(),
        ));
    }
    let tail = groups
        .iter()
        .find(|&&(_, cnt)| cnt >= spec.n - m)
        .copied()
        .ok_or_else(|| {
            Error::SpecShape("no constant source tail of length N - m".into())
        })?;
    let a = tail.0;
    let mut spikes: Vec<f64> = Vec::new();
    let mut surplus = tail.1 - (spec.n - m);
    for &(val, cnt) in &groups {
        if (val - a).abs() < 1e-12 {
            for _ in 0..surplus.min(cnt) {
                spikes.push(val);
            }
            surplus = surplus.saturating_sub(cnt);
        } else {
            for _ in 0..cnt {
                spikes.push(val);
            }
        }
    }
    if spikes.len() != m {
        return Err(Error::SpecShape(
            "source tail does not leave exactly m spikes".into(),
        ));
    }

    // bulk: kernel of the (N-m)-fold tail alone
    let bulk_spec =
        EnsembleSpec::ginibre(spec.n - m, spec.nu.clone(), vec![a; spec.n - m])?;
    let bulk = KernelEvaluator::new(&bulk_spec)?.eval(x, y)?;

    let n_pow = spec.n - m;
    let mut corrections = Vec::with_capacity(m);
    for k in 1..=m {
        let lk = l_type_ii(x, a, n_pow, &spikes[..k - 1], spec)?;
        let lt = l_type_i(y, a, n_pow, &spikes[..k], spec)?;
        corrections.push(lk * lt);
    }
    Ok((bulk, corrections))
}

/// Type-II integral: int u^{nu0} e^{-u} Psi(u;x) (u+a)^n prod (u+a_l) du.
fn l_type_ii(
    x: f64,
    a: f64,
    n_pow: usize,
    extra: &[f64],
    spec: &EnsembleSpec,
) -> Result<Complex64> {
    let nu0 = spec.nu[0];
    let g = |u: f64| -> f64 {
        let mut s = -u + nu0 * u.ln() + n_pow as f64 * (u + a).ln();
        for &al in extra {
            s += (u + al).ln();
        }
        s
    };
    let mut gmax = f64::NEG_INFINITY;
    let mut u = 1e-4;
    while u < 1e5 {
        gmax = gmax.max(g(u));
        u *= 1.2;
    }
    let mut u_hi = 10.0;
    u = 1e-4;
    while u < 1e5 {
        if g(u) > gmax - 46.0 {
            u_hi = u;
        }
        u *= 1.2;
    }
    let u_lo = if a == 0.0 { NULL_EPS } else { 0.0 };
    let map = if u_lo > 0.0 {
        HalfLineMap::Geometric
    } else {
        HalfLineMap::Exponential
    };
    let path = ContourSpec::new(PathKind::HalfLine { start: u_lo, cutoff: u_hi * 1.3, map })
        .with_order(20, 14);
    let mut entries: Vec<(f64, Complex64)> = Vec::new();
    for (z, w) in path.nodes() {
        let u = z.re;
        let (pm, ps) = psi_scaled_params(Complex64::new(u, 0.0), x, &spec.nu)?;
        let l = Complex64::new(g(u) + ps + w.re.abs().ln(), 0.0) + pm.ln();
        let sign = if w.re >= 0.0 { 1.0 } else { -1.0 };
        entries.push((sign, l));
    }
    let mx = entries.iter().map(|e| e.1.re).fold(f64::NEG_INFINITY, f64::max);
    let mut sum = Complex64::new(0.0, 0.0);
    for (sgn, l) in &entries {
        let e = l - mx;
        if e.re > -745.0 {
            sum += sgn * e.exp();
        }
    }
    Ok(sum * mx.exp())
}

/// Type-I integral: (1/2 pi i) oint e^v Phi(v;y) (v+a)^{-n} prod (v+a_l)^{-1} dv.
fn l_type_i(
    y: f64,
    a: f64,
    n_pow: usize,
    poles: &[f64],
    spec: &EnsembleSpec,
) -> Result<Complex64> {
    // reuse the cluster circles by building the matching source multiset
    let mut src = vec![a; n_pow];
    src.extend_from_slice(poles);
    let tmp = EnsembleSpec::ginibre(src.len(), spec.nu.clone(), src)?;
    let ev = KernelEvaluator::new(&tmp)?;
    let (phi_m, phi_s) = ev.phi_column(y)?;
    let mut entries: Vec<(Complex64, Complex64)> = Vec::new();
    for (j, &(_, w)) in ev.v_nodes.iter().enumerate() {
        let l = ev.v_exponent[j] + phi_s[j];
        entries.push((w * phi_m[j], l));
    }
    let mx = entries.iter().map(|e| e.1.re).fold(f64::NEG_INFINITY, f64::max);
    let mut sum = Complex64::new(0.0, 0.0);
    for (wm, l) in &entries {
        let e = l - mx;
        if e.re > -745.0 {
            sum += wm * e.exp();
        }
    }
    Ok(sum * mx.exp() / Complex64::new(0.0, 2.0 * PI))
}

// ---------------------------------------------------------------------------
// null-source double integral cross-check (small N)
// ---------------------------------------------------------------------------

/// The classic a = 0 double integral (u on the vertical line Re = -1/2, t on
/// a circle around 0..N-1); kept as a cross-check routine at small N.
pub fn kernel_kn_null_form(x: f64, y: f64, nus: &[f64], n: usize) -> Result<Complex64> {
    let u_line = ContourSpec::vertical_line(-0.5, 60.0).with_order(24, 30);
    let t_circle = ContourSpec::circle(
        Complex64::new((n as f64 - 1.0) / 2.0, 0.0),
        (n as f64 - 1.0) / 2.0 + 0.45,
    )
    .with_order(24, (4 * n).clamp(8, 64));
    let mut total = Complex64::new(0.0, 0.0);
    let lnx = x.ln();
    let lny = y.ln();
    let t_nodes = t_circle.nodes();
    for (u, wu) in u_line.nodes() {
        let mut inner = Complex64::new(0.0, 0.0);
        for &(t, wt) in &t_nodes {
            let mut l = Complex64::new(0.0, 0.0);
            // j = -1 term carries nu_{-1} = 0
            l += log_gamma(u + 1.0).unwrap_or(Complex64::new(-1e30, 0.0))
                - log_gamma(t + 1.0).unwrap_or(Complex64::new(1e30, 0.0));
            for &nv in nus {
                l += log_gamma(nv + u + 1.0).unwrap_or(Complex64::new(-1e30, 0.0))
                    - log_gamma(nv + t + 1.0).unwrap_or(Complex64::new(1e30, 0.0));
            }
            l += log_gamma(t - n as f64 + 1.0).unwrap_or(Complex64::new(-1e30, 0.0))
                - log_gamma(u - n as f64 + 1.0).unwrap_or(Complex64::new(1e30, 0.0));
            l += t * lnx - (u + 1.0) * lny;
            inner += wt * l.exp() / (u - t);
        }
        total += wu * inner;
    }
    Ok(total / (Complex64::new(0.0, 2.0 * PI) * Complex64::new(0.0, 2.0 * PI)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::integrate;
    use crate::specfun::gamma_real;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ginibre(n: usize, nu: &[f64], source: &[f64]) -> EnsembleSpec {
        EnsembleSpec::ginibre(n, nu.to_vec(), source.to_vec()).unwrap()
    }

    // Psi residue-series oracle (small arguments):
    // Psi(u;x) = 1/Gamma(nu0+1) sum_k x^k 1F1(-k;nu0+1;u)/(k! prod Gamma(nu_l+1+k))
    fn psi_series_oracle(u: Complex64, x: f64, nu: &[f64], terms: usize) -> Complex64 {
        let nu0 = nu[0];
        let mut sum = c(0.0, 0.0);
        let mut log_fact = 0.0;
        for k in 0..terms {
            let kf = k as f64;
            if k > 0 {
                log_fact += kf.ln();
            }
            let mut lg = kf * x.ln() - log_fact;
            for &nv in &nu[1..] {
                lg -= ln_gamma_real_pos(nv + 1.0 + kf);
            }
            let f = hyp1f1(c(-kf, 0.0), nu0 + 1.0, u).unwrap();
            sum += f * lg.exp();
        }
        sum / gamma_real(nu0 + 1.0).unwrap()
    }

    #[test]
    fn little_phi_trivial() {
        let v = little_phi(c(0.0, 0.0), c(1.0, 0.0), 0.0).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn little_phi_integral_form() {
        // phi(v;s) = 1/Gamma(nu0+1) int t^{nu0+s-1} e^{-t} 0F1(nu0+1;-vt) dt
        let (v, s, nu0) = (c(1.0, 0.0), c(2.0, 0.0), 0.0);
        let direct = little_phi(v, s, nu0).unwrap();
        let path = ContourSpec::half_line(60.0).with_order(24, 12);
        let quad = integrate(
            |t| t.powc(nu0 + s - 1.0) * (-t).exp() * hyp0f1(nu0 + 1.0, -v * t).unwrap(),
            &path,
            1e-12,
        )
        .unwrap();
        let expect = quad.value / gamma_real(nu0 + 1.0).unwrap();
        // the spec point (v=1, s=2, nu0=0) sits on a zero of the function;
        // both routes must agree that it vanishes
        assert!((direct - expect).norm() < 1e-10, "{direct} vs {expect}");
        assert!(direct.norm() < 1e-10);
    }

    #[test]
    fn little_phi_complex_against_quadrature() {
        let (v, s, nu0) = (c(2.0, 1.0), c(1.5, 0.0), 1.0);
        let direct = little_phi(v, s, nu0).unwrap();
        let path = ContourSpec::half_line(70.0).with_order(24, 14);
        let quad = integrate(
            |t| t.powc(nu0 + s - 1.0) * (-t).exp() * hyp0f1(nu0 + 1.0, -v * t).unwrap(),
            &path,
            1e-12,
        )
        .unwrap();
        let expect = quad.value / gamma_real(nu0 + 1.0).unwrap();
        assert!(
            (direct - expect).norm() < 1e-9 * expect.norm(),
            "{direct} vs {expect}"
        );
    }

    #[test]
    fn psi_r0_closed_form() {
        let spec = ginibre(1, &[0.0], &[0.0]);
        let got = psi(c(1.0, 0.0), 1.0, &spec).unwrap();
        let expect = 1.0f64.exp() * hyp0f1(1.0, c(-1.0, 0.0)).unwrap();
        assert!((got - expect).norm() < 1e-12 * expect.norm());
    }

    #[test]
    fn psi_r1_matches_residue_series() {
        let nu = [0.0, 1.0];
        let spec = ginibre(1, &nu, &[1.0]);
        for &(u, x) in &[(0.0, 0.5), (1.0, 0.5), (2.0, 1.5)] {
            let got = psi(c(u, 0.0), x, &spec).unwrap();
            let expect = psi_series_oracle(c(u, 0.0), x, &nu, 40);
            assert!(
                (got - expect).norm() < 1e-9 * (1.0 + expect.norm()),
                "u={u} x={x}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn psi_small_x_leading_residue() {
        // x -> 0+: Psi(u; 0) -> 1/(Gamma(nu0+1) prod Gamma(nu_l+1))
        let nu = [0.5, 1.5];
        let spec = ginibre(1, &nu, &[1.0]);
        let got = psi(c(1.0, 0.0), 1e-10, &spec).unwrap();
        let expect = 1.0 / (gamma_real(1.5).unwrap() * gamma_real(2.5).unwrap());
        assert!(
            (got.re - expect).abs() < 1e-6 * expect,
            "{} vs {expect}",
            got.re
        );
    }

    #[test]
    fn phi_r0_closed_form() {
        let spec = ginibre(1, &[0.0], &[0.0]);
        let got = phi_fn(c(1.0, 0.0), 2.0, &spec).unwrap();
        let expect = (-2.0f64).exp() * hyp0f1(1.0, c(-2.0, 0.0)).unwrap();
        assert!((got - expect).norm() < 1e-12 * expect.norm());
    }

    #[test]
    fn phi_mellin_transform_identity() {
        // int_0^inf y^{s-1} Phi(v;y) dy = phi(v;s) prod_{l>=1} Gamma(nu_l+s)
        let nu = [0.0, 1.0];
        let spec = ginibre(1, &nu, &[1.0]);
        let (v, s) = (c(0.5, 0.0), c(1.5, 0.0));
        let path = ContourSpec::half_line(220.0).with_order(24, 24);
        let quad = integrate(
            |y| y.powc(s - 1.0) * phi_fn(v, y.re, &spec).unwrap(),
            &path,
            1e-10,
        )
        .unwrap();
        let expect =
            little_phi(v, s, nu[0]).unwrap() * complex_gamma(c(nu[1], 0.0) + s).unwrap();
        assert!(
            (quad.value - expect).norm() < 1e-7 * expect.norm(),
            "{} vs {expect}",
            quad.value
        );
    }

    #[test]
    fn phi_r1_against_t_integral() {
        // Phi(v;y) = 1/Gamma(nu0+1) int t^{nu1-1} e^{-t} (y/t)^{nu0} e^{-y/t}
        //            0F1(nu0+1; -v y/t) dt at r = 1
        let nu = [0.0, 1.0];
        let spec = ginibre(1, &nu, &[1.0]);
        let (v, y) = (c(0.0, 0.0), 1.0);
        let got = phi_fn(v, y, &spec).unwrap();
        let path = ContourSpec::new(PathKind::HalfLine {
            start: 1e-7,
            cutoff: 80.0,
            map: HalfLineMap::Geometric,
        })
        .with_order(24, 24);
        let quad = integrate(
            |t| {
                let yt = y / t.re;
                t.powc(c(nu[1] - 1.0, 0.0))
                    * (-t).exp()
                    * yt.powf(nu[0])
                    * (-yt).exp()
                    * hyp0f1(nu[0] + 1.0, -v * yt).unwrap()
            },
            &path,
            1e-10,
        )
        .unwrap();
        let expect = quad.value / gamma_real(nu[0] + 1.0).unwrap();
        assert!(
            (got - expect).norm() < 1e-8 * expect.norm(),
            "{got} vs {expect}"
        );
    }

    #[test]
    fn psi_q_reduces_to_psi_at_q0() {
        let nu = [0.0, 1.0];
        let uspec = EnsembleSpec::truncated_unitary(1, nu.to_vec(), vec![2.0], vec![1.0])
            .unwrap()
            .with_q(0)
            .unwrap();
        let gspec = ginibre(1, &nu, &[1.0]);
        let got = psi_q(c(1.0, 0.0), 0.5, &uspec).unwrap();
        let expect = psi(c(1.0, 0.0), 0.5, &gspec).unwrap();
        assert!(
            (got - expect).norm() < 1e-8 * (1.0 + expect.norm()),
            "{got} vs {expect}"
        );
    }

    #[test]
    fn psi_q_matches_residue_series() {
        // q = r = 1, mu = 2, nu = (0,0), u = 0.3, x = 0.4
        let spec =
            EnsembleSpec::truncated_unitary(1, vec![0.0, 0.0], vec![2.0], vec![1.0]).unwrap();
        let got = psi_q(c(0.3, 0.0), 0.4, &spec).unwrap();
        let expect = psi_q_series(c(0.3, 0.0), 0.4, &spec, 40).unwrap();
        assert!(
            (got - expect).norm() < 1e-8 * expect.norm(),
            "{got} vs {expect}"
        );
        // u = 0 collapse, 30-term truncation
        let got0 = psi_q(c(0.0, 0.0), 0.4, &spec).unwrap();
        let expect0 = psi_q_series(c(0.0, 0.0), 0.4, &spec, 30).unwrap();
        assert!((got0 - expect0).norm() < 1e-8 * expect0.norm());
    }

    #[test]
    fn phi_q_reduces_to_phi_at_q0() {
        let nu = [0.0, 1.0];
        let uspec = EnsembleSpec::truncated_unitary(1, nu.to_vec(), vec![2.0], vec![1.0])
            .unwrap()
            .with_q(0)
            .unwrap();
        let gspec = ginibre(1, &nu, &[1.0]);
        let got = phi_q(c(0.5, 0.0), 1.0, &uspec).unwrap();
        let expect = phi_fn(c(0.5, 0.0), 1.0, &gspec).unwrap();
        assert!(
            (got - expect).norm() < 1e-8 * expect.norm(),
            "{got} vs {expect}"
        );
    }

    #[test]
    fn phi_q_mellin_with_beta_factors() {
        // int y^{s-1} Phi_q(v;y) dy = phi(v;s) Gamma(nu1+s)/Gamma(mu1+s)
        let spec =
            EnsembleSpec::truncated_unitary(1, vec![0.0, 1.0], vec![3.0], vec![1.0]).unwrap();
        let (v, s) = (c(-1.0, 0.0), c(1.5, 0.0));
        let path = ContourSpec::half_line(60.0).with_order(24, 12);
        let quad = integrate(
            |y| y.powc(s - 1.0) * phi_q(v, y.re, &spec).unwrap(),
            &path,
            1e-10,
        )
        .unwrap();
        let expect = little_phi(v, s, 0.0).unwrap()
            * (log_gamma(c(1.0, 0.0) + s).unwrap() - log_gamma(c(3.0, 0.0) + s).unwrap())
                .exp();
        assert!(
            (quad.value - expect).norm() < 1e-7 * expect.norm(),
            "{} vs {expect}",
            quad.value
        );
    }

    #[test]
    fn phi_q_against_beta_t_integral() {
        // r = q = 1, mu = 3, nu = (0,1), v = 0, y = 1: direct (0,1) integral
        let spec =
            EnsembleSpec::truncated_unitary(1, vec![0.0, 1.0], vec![3.0], vec![1.0]).unwrap();
        let (v, y) = (c(0.0, 0.0), 1.0);
        let got = phi_q(v, y, &spec).unwrap();
        let (nu0, nu1, mu1) = (0.0, 1.0, 3.0);
        let path = ContourSpec::new(PathKind::HalfLine {
            start: 1e-9,
            cutoff: 1.0 - 1e-9,
            map: HalfLineMap::Geometric,
        })
        .with_order(32, 32);
        let quad = integrate(
            |t| {
                let tr = t.re;
                let yt = y / tr;
                tr.powf(nu1 - 1.0)
                    * (1.0 - tr).powf(mu1 - nu1 - 1.0)
                    * yt.powf(nu0)
                    * (-yt).exp()
                    * hyp0f1(nu0 + 1.0, -v * yt).unwrap()
            },
            &path,
            1e-10,
        )
        .unwrap();
        let expect =
            quad.value / (gamma_real(nu0 + 1.0).unwrap() * gamma_real(mu1 - nu1).unwrap());
        assert!(
            (got - expect).norm() < 1e-7 * expect.norm(),
            "{got} vs {expect}"
        );
    }

    #[test]
    fn kernel_n1_exponential_density() {
        // N=1, r=0, nu0=0, a=0: K_1(x,x) = e^{-x}
        let spec = ginibre(1, &[0.0], &[0.0]);
        let k = kernel_kn(1.0, 1.0, &spec).unwrap();
        let expect = (-1.0f64).exp();
        assert!(
            (k.value.re - expect).abs() < 1e-8,
            "{} vs {expect} (err {:.2e})",
            k.value.re,
            k.err_estimate
        );
        assert!(k.value.im.abs() < 1e-10);
    }

    #[test]
    fn biortho_n1_null_source() {
        let spec = ginibre(1, &[0.0], &[0.0]);
        let k = kernel_kn_biortho(1.0, 2.0, &spec).unwrap();
        let expect = (-2.0f64).exp();
        assert!((k.re - expect).abs() < 1e-10, "{} vs {expect}", k.re);
    }

    #[test]
    fn g_matrix_spot_value() {
        // g_{1,1} at r=0, nu0=0, a1=2 -> e^2
        let spec = ginibre(1, &[0.0], &[2.0]);
        let g = g_matrix(&spec).unwrap();
        assert!((g[(0, 0)] - (2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn kernel_matches_biortho_n4_r0() {
        let spec = ginibre(4, &[0.0], &[0.5, 1.0, 2.0, 3.5]);
        let ev = KernelEvaluator::new(&spec).unwrap();
        for &(x, y) in &[(0.5, 0.5), (1.0, 2.0), (3.0, 1.5)] {
            let direct = ev.eval(x, y).unwrap();
            let oracle = kernel_kn_biortho(x, y, &spec).unwrap();
            assert!(
                (direct - oracle).norm() < 1e-8 * (1.0 + oracle.norm()),
                "({x},{y}): {direct} vs {oracle}"
            );
        }
    }

    #[test]
    fn kernel_matches_biortho_n2_r1() {
        let spec = ginibre(2, &[0.0, 1.0], &[0.7, 1.8]);
        let ev = KernelEvaluator::new(&spec).unwrap();
        for &(x, y) in &[(0.8, 0.8), (1.5, 2.5)] {
            let direct = ev.eval(x, y).unwrap();
            let oracle = kernel_kn_biortho(x, y, &spec).unwrap();
            assert!(
                (direct - oracle).norm() < 1e-7 * (1.0 + oracle.norm()),
                "({x},{y}): {direct} vs {oracle}"
            );
        }
    }

    #[test]
    fn csum_interpolation_identity() {
        // sum_i (i-1)! L_{i-1}^{nu0}(u) prod Gamma(nu_l+i) c_{i,j}
        //   = e^{-a_j} prod_{l!=j} (-u-a_l)/(a_j-a_l)
        let spec = ginibre(4, &[0.5, 1.0], &[0.4, 1.1, 2.2, 3.3]);
        let g = g_matrix(&spec).unwrap();
        let inv = g.clone().try_inverse().unwrap(); // c_{i,j} = inv[(j, i)]
        let nu0 = spec.nu[0];
        let mut state = 12345u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 6.0 - 3.0
        };
        for _ in 0..10 {
            let u = rnd();
            for j in 0..4 {
                let mut lhs = 0.0;
                for i in 1..=4 {
                    let mut pre = ln_gamma_real_pos(i as f64);
                    for &nv in &spec.nu[1..] {
                        pre += ln_gamma_real_pos(nv + i as f64);
                    }
                    lhs += pre.exp() * laguerre(i - 1, nu0, c(u, 0.0)).re * inv[(j, i - 1)];
                }
                let a = &spec.source;
                let mut rhs = (-a[j]).exp();
                for l in 0..4 {
                    if l != j {
                        rhs *= (-u - a[l]) / (a[j] - a[l]);
                    }
                }
                assert!(
                    (lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()),
                    "u={u} j={j}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn g_determinant_positive_small_n() {
        // with columns ordered by ascending source value the moment
        // determinant is positive (well-posedness of the inversion)
        for n in 1..=8usize {
            let source: Vec<f64> = (0..n).map(|k| 0.3 + 0.9 * k as f64).collect();
            let spec = ginibre(n, &[0.0], &source);
            let g = g_matrix(&spec).unwrap();
            let mut asc = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    asc[(i, j)] = g[(i, n - 1 - j)];
                }
            }
            assert!(asc.determinant() > 0.0, "N={n}");
            assert!(g.determinant().abs() > 0.0, "N={n}");
        }
    }

    #[test]
    fn quasi_decomposition_m0_is_kernel() {
        let spec = ginibre(3, &[0.0], &[1.2, 1.2, 1.2]);
        let (bulk, spikes) = quasi_decomposition(1.0, 1.5, &spec, 0).unwrap();
        assert!(spikes.is_empty());
        let k = KernelEvaluator::new(&spec).unwrap().eval(1.0, 1.5).unwrap();
        assert!((bulk - k).norm() < 1e-8 * (1.0 + k.norm()), "{bulk} vs {k}");
    }

    #[test]
    fn partial_fraction_identity() {
        // 1/(u-v) prod (u+a_l)/(v+a_l)
        //   = 1/(u-v) + sum_k prod_{l<k}(u+a_l)/prod_{l<=k}(v+a_l)
        let u = c(0.7, 0.3);
        let v = c(-1.2, 0.8);
        let a = [0.9, 2.1];
        let mut lhs = 1.0 / (u - v);
        for &al in &a {
            lhs *= (u + al) / (v + al);
        }
        let mut rhs = 1.0 / (u - v);
        for k in 1..=a.len() {
            let mut term = c(1.0, 0.0);
            for &al in &a[..k - 1] {
                term *= u + al;
            }
            for &al in &a[..k] {
                term /= v + al;
            }
            rhs += term;
        }
        assert!((lhs - rhs).norm() < 1e-13 * lhs.norm());
    }

    #[test]
    fn quasi_decomposition_bulk_plus_spike() {
        let spec = ginibre(3, &[0.0], &[2.5, 1.0, 1.0]);
        let (x, y) = (0.9, 1.4);
        let (bulk, spikes) = quasi_decomposition(x, y, &spec, 1).unwrap();
        assert_eq!(spikes.len(), 1);
        let total = bulk + spikes[0];
        let k = kernel_kn_biortho(x, y, &spec).unwrap();
        assert!((total - k).norm() < 1e-7 * (1.0 + k.norm()), "{total} vs {k}");
    }

    #[test]
    fn null_form_cross_check() {
        // a = 0 kernel through the epsilon prescription vs the 0..N-1
        // residue double integral, N = 2, r = 0
        let spec = ginibre(2, &[0.0], &[0.0, 0.0]);
        let k = kernel_kn(1.0, 1.5, &spec).unwrap();
        let alt = kernel_kn_null_form(1.0, 1.5, &[0.0], 2).unwrap();
        assert!(
            (k.value - alt).norm() < 1e-6 * (1.0 + alt.norm()),
            "{} vs {alt}",
            k.value
        );
    }

    #[test]
    fn hankel_pair_identities() {
        // L_n^{nu}(y) = e^y/(n! Gamma(nu+1)) int t^{nu+n} e^{-t} 0F1(nu+1;-yt) dt
        // t^n = n! e^t / Gamma(nu+1) int y^{nu} L_n^{nu}(y) e^{-y} 0F1(nu+1;-ty) dy
        for &nu0 in &[0.0, 1.0, 3.0] {
            for &n in &[0usize, 2, 5, 8] {
                for &arg in &[0.5, 2.0] {
                    let path = ContourSpec::half_line(120.0).with_order(32, 20);
                    let fact: f64 = ln_gamma_real_pos(n as f64 + 1.0).exp();
                    let g0 = gamma_real(nu0 + 1.0).unwrap();
                    let lhs1 = laguerre(n, nu0, c(arg, 0.0)).re;
                    let rhs1 = integrate(
                        |t| {
                            t.powc(c(nu0 + n as f64, 0.0))
                                * (-t).exp()
                                * hyp0f1(nu0 + 1.0, -arg * t).unwrap()
                        },
                        &path,
                        1e-11,
                    )
                    .unwrap()
                    .value
                    .re
                        * arg.exp()
                        / (fact * g0);
                    assert!(
                        (lhs1 - rhs1).abs() < 1e-8 * (1.0 + lhs1.abs()),
                        "pair 1: nu={nu0} n={n} arg={arg}: {lhs1} vs {rhs1}"
                    );
                    let lhs2 = arg.powi(n as i32);
                    let rhs2 = integrate(
                        |y| {
                            y.powc(c(nu0, 0.0))
                                * laguerre(n, nu0, y)
                                * (-y).exp()
                                * hyp0f1(nu0 + 1.0, -arg * y).unwrap()
                        },
                        &path,
                        1e-11,
                    )
                    .unwrap()
                    .value
                    .re
                        * fact
                        * arg.exp()
                        / g0;
                    assert!(
                        (lhs2 - rhs2).abs() < 1e-8 * (1.0 + lhs2.abs()),
                        "pair 2: nu={nu0} n={n} arg={arg}: {lhs2} vs {rhs2}"
                    );
                }
            }
        }
    }
}
