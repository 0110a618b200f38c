//! Averages of characteristic polynomials, reciprocals, and ratios for the
//! product ensemble, with the scaling normalizations for the hard-edge
//! limit studies. All Gamma prefactors are carried in log space with the
//! sign separated, since they overflow doubles well before N = 20.

use crate::contour::{ContourSpec, HalfLineMap, PathKind};
use crate::dd::DdC;
use crate::error::{Error, Result};
use crate::kernel_finite::{psi_scaled, EnsembleKind, EnsembleSpec, KernelEvaluator};
use crate::specfun::ln_gamma_real_pos;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Scaled complex value: `value * exp(log_scale)` with the huge magnitude
/// kept in the exponent.
#[derive(Clone, Copy, Debug)]
pub struct ScaledValue {
    pub value: Complex64,
    pub log_scale: f64,
}

impl ScaledValue {
    pub fn to_complex(&self) -> Result<Complex64> {
        let total = self.log_scale + self.value.norm().max(1e-300).ln();
        if total.abs() > 600.0 * std::f64::consts::LN_10 {
            return Err(Error::Overflow { exponent: total / std::f64::consts::LN_10 });
        }
        Ok(self.value * self.log_scale.exp())
    }
}

/// E[prod (x - x_l)] in scaled form:
/// (-1)^N prod Gamma(nu_l+N+1) int u^{nu0} e^{-u} Psi(u;x) prod (u+a_l) du.
pub fn avg_char_poly_scaled(x: Complex64, spec: &EnsembleSpec) -> Result<ScaledValue> {
    if spec.kind != EnsembleKind::Ginibre {
        return Err(Error::SpecShape(
            "characteristic polynomial averages implemented for the Ginibre chain".into(),
        ));
    }
    let nu0 = spec.nu[0];
    let mut log_pre = 0.0;
    for &nv in &spec.nu[1..] {
        log_pre += ln_gamma_real_pos(nv + spec.n as f64 + 1.0);
    }
    let sign = if spec.n % 2 == 0 { 1.0 } else { -1.0 };

    // u support: weight u^{nu0} e^{-u} prod(u+a_l)
    let g = |u: f64| -> f64 {
        let mut s = -u + nu0 * u.ln();
        for &a in &spec.source {
            s += (u + a).ln();
        }
        s
    };
    let mut gmax = f64::NEG_INFINITY;
    let mut u = 1e-4;
    while u < 1e5 {
        gmax = gmax.max(g(u));
        u *= 1.15;
    }
    let mut u_hi = 10.0f64;
    u = 1e-4;
    while u < 1e5 {
        if g(u) > gmax - 46.0 {
            u_hi = u;
        }
        u *= 1.15;
    }
    let map = if nu0 == nu0.round() && nu0 >= 0.0 {
        HalfLineMap::Exponential
    } else {
        HalfLineMap::Power((2.0f64).max((3.0 / (nu0 + 1.0)).ceil()) as u32)
    };
    let path = ContourSpec::new(PathKind::HalfLine { start: 0.0, cutoff: u_hi * 1.3, map })
        .with_order(24, 16);

    let mut entries: Vec<(f64, Complex64)> = Vec::new();
    for (z, w) in path.nodes() {
        let u = z.re;
        let (pm, ps) = psi_scaled(Complex64::new(u, 0.0), x.re, spec)?;
        // complex x is only needed off-axis for the reciprocal side; the
        // polynomial side is real in all our uses
        debug_assert!(x.im == 0.0, "polynomial average evaluated on the real axis");
        let l = Complex64::new(g(u) + ps + w.re.abs().ln(), 0.0) + pm.ln();
        entries.push((if w.re >= 0.0 { 1.0 } else { -1.0 }, l));
    }
    let mx = entries.iter().map(|e| e.1.re).fold(f64::NEG_INFINITY, f64::max);
    let mut sum = DdC::ZERO;
    for (sgn, l) in &entries {
        let e = l - mx;
        if e.re > -745.0 {
            sum = sum.add(DdC::from(sgn * e.exp()));
        }
    }
    Ok(ScaledValue { value: sum.to_c64() * sign, log_scale: mx + log_pre })
}

/// E[prod (x - x_l)] as a plain value (errors out past 1e600).
pub fn avg_char_poly(x: f64, spec: &EnsembleSpec) -> Result<Complex64> {
    avg_char_poly_scaled(Complex64::new(x, 0.0), spec)?.to_complex()
}

/// E[prod 1/(z - x_l)]:
/// (-1)^{N-1}/(2 pi i prod Gamma(nu_l+N)) int_0^inf dt oint dv
///   e^v Phi(v;t) / (z-t) prod 1/(v+a_l).
pub fn avg_inv_char_poly(z: Complex64, spec: &EnsembleSpec) -> Result<Complex64> {
    if spec.kind != EnsembleKind::Ginibre {
        return Err(Error::SpecShape(
            "characteristic polynomial averages implemented for the Ginibre chain".into(),
        ));
    }
    if z.im == 0.0 && z.re >= 0.0 {
        return Err(Error::Domain(
            "reciprocal average needs z off the positive real axis".into(),
        ));
    }
    let mut log_pre = 0.0;
    for &nv in &spec.nu[1..] {
        log_pre += ln_gamma_real_pos(nv + spec.n as f64);
    }
    let sign = if (spec.n + 1) % 2 == 0 { 1.0 } else { -1.0 };

    // one circle around all the -a_l; there is no outer variable to avoid,
    // so the radius can sit near the contour saddle |v + a| ~ N
    let a_max = spec.source.first().copied().unwrap_or(0.0);
    let a_min = spec.source.last().copied().unwrap_or(0.0);
    let radius = 0.5 * (a_max - a_min) + (spec.n as f64).max(1.0);
    let circle = ContourSpec::circle(
        Complex64::new(-0.5 * (a_max + a_min), 0.0),
        radius,
    )
    .with_order(20, (8 + spec.n).clamp(8, 48));
    let v_nodes = circle.nodes();

    // shared Mellin-Barnes grid over the circle (r >= 1)
    let grid = if spec.r >= 1 {
        let vs: Vec<Complex64> = v_nodes.iter().map(|&(v, _)| v).collect();
        Some(crate::kernel_finite::PhiLineGrid::build(&spec.nu, &[], &vs, 20)?)
    } else {
        None
    };
    let nu0 = spec.nu[0];
    let lg0 = ln_gamma_real_pos(nu0 + 1.0);
    let phi_at = |vi: usize, v: Complex64, t: f64| -> Result<(Complex64, f64)> {
        if let Some(g) = &grid {
            Ok(g.eval_scaled(vi, t))
        } else {
            let f = crate::specfun::hyp0f1(nu0 + 1.0, -v * t)?;
            let m = f.norm().max(1e-300);
            Ok((f / m, nu0 * t.ln() - t - lg0 + m.ln()))
        }
    };

    // t integral over (0, inf)
    let t_hi = 60.0 + 10.0 * spec.r as f64 + 2.0 * a_max;
    let t_path = ContourSpec::half_line(t_hi).with_order(24, 16);

    let mut total = DdC::ZERO;
    for (tz, tw) in t_path.nodes() {
        let t = tz.re;
        // (1/2 pi i) oint e^v Phi(v;t) prod 1/(v+a_l) dv
        let mut entries: Vec<(Complex64, Complex64)> = Vec::new();
        for (vi, &(v, w)) in v_nodes.iter().enumerate() {
            let (pm, ps) = phi_at(vi, v, t)?;
            let mut l = v + ps;
            for &a in &spec.source {
                l -= (v + a).ln();
            }
            entries.push((w * pm, l));
        }
        let mx = entries.iter().map(|e| e.1.re).fold(f64::NEG_INFINITY, f64::max);
        let mut inner = Complex64::new(0.0, 0.0);
        for (wm, l) in &entries {
            let e = l - mx;
            if e.re > -745.0 {
                inner += wm * e.exp();
            }
        }
        let inner = inner * mx.exp() / Complex64::new(0.0, 2.0 * PI);
        total = total.add(DdC::from(tw * inner / (z - t)));
    }
    Ok(total.to_c64() * sign * (-log_pre).exp())
}

/// E[prod (x - x_l)/(z - x_l)] = int (x-u)/(z-u) K_N(x,u) du.
pub fn avg_ratio(x: f64, z: Complex64, spec: &EnsembleSpec) -> Result<Complex64> {
    if x <= 0.0 {
        return Err(Error::Domain("ratio argument x must be positive".into()));
    }
    if z.im == 0.0 && z.re >= 0.0 {
        return Err(Error::Domain("ratio needs z off the positive real axis".into()));
    }
    let ev = KernelEvaluator::new(spec)?;
    let u_hi = ev.u_cutoff().max(40.0);
    let path = ContourSpec::half_line(u_hi).with_order(24, 20);
    let mut total = Complex64::new(0.0, 0.0);
    for (uz, w) in path.nodes() {
        let u = uz.re;
        if u <= 0.0 {
            continue;
        }
        let k = ev.eval(x, u)?;
        total += w * k * (x - u) / (z - u);
    }
    Ok(total)
}

/// Scaling regimes of the characteristic-polynomial limit theorems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalingRegime {
    Subcritical,
    Critical,
    Supercritical,
}

/// Parameters of the polynomial scaling study.
pub struct ScalingStudy {
    pub regime: ScalingRegime,
    /// subcritical: bulk strength b in (0,1); supercritical: b > 1.
    pub b: f64,
    pub tau: f64,
    /// outlier parameters (b_j or sigma_j depending on regime)
    pub outliers: Vec<f64>,
}

/// log |Upsilon| and sign of the regime normalization.
pub fn upsilon_log(study: &ScalingStudy, spec: &EnsembleSpec) -> (f64, f64) {
    let n = spec.n as f64;
    let nu0 = spec.nu[0];
    let m = study.outliers.len();
    let sign = if spec.n % 2 == 0 { 1.0 } else { -1.0 };
    let mut lg = 0.0;
    match study.regime {
        ScalingRegime::Subcritical => {
            let b = study.b;
            lg += 0.5 * (2.0 * PI).ln() + (nu0 + n) * n.ln() - (1.0 - b) * n;
            for &nv in &spec.nu[1..] {
                lg += ln_gamma_real_pos(nv + n);
            }
            lg += nu0 * (1.0 - b).ln();
            for &bj in &study.outliers {
                lg += (1.0 - b + bj).ln();
            }
        }
        ScalingRegime::Critical => {
            lg += (n + (nu0 - m as f64) / 2.0) * n.ln()
                + n.sqrt() * study.tau
                + study.tau * study.tau / 2.0;
            for &nv in &spec.nu[1..] {
                lg += ln_gamma_real_pos(nv + n);
            }
        }
        ScalingRegime::Supercritical => {
            let b = study.b;
            lg += (n - m as f64) * (b * n).ln() + m as f64 * (b / (b - 1.0)).ln();
        }
    }
    (lg, sign)
}

/// The regime-normalized polynomial average used by the convergence studies:
/// returns sqrt(N) prod(nu_l+N) Upsilon * E[prod (x_l - x_scaled)], which
/// approaches the regime's limiting special function.
pub fn limit_char_poly_scaled(
    study: &ScalingStudy,
    spec: &EnsembleSpec,
    xi: f64,
) -> Result<Complex64> {
    let n = spec.n as f64;
    let x_scaled = match study.regime {
        ScalingRegime::Subcritical => xi / ((1.0 - study.b) * n),
        ScalingRegime::Critical => xi / n.sqrt(),
        ScalingRegime::Supercritical => (1.0 - 1.0 / study.b) * xi,
    };
    let poly = avg_char_poly_scaled(Complex64::new(x_scaled, 0.0), spec)?;
    // E[prod (x_l - x)] = (-1)^N E[prod (x - x_l)]
    let sign_flip = if spec.n % 2 == 0 { 1.0 } else { -1.0 };
    let (lg_ups, sign_ups) = upsilon_log(study, spec);
    let mut log_front = 0.5 * n.ln() + lg_ups;
    for &nv in &spec.nu[1..] {
        log_front += (nv + n).ln();
    }
    // supercritical uses b/(b-1) prod(nu_l+N) Upsilon, without the sqrt(N)
    if study.regime == ScalingRegime::Supercritical {
        log_front -= 0.5 * n.ln();
        log_front += (study.b / (study.b - 1.0)).ln();
    }
    let total = ScaledValue {
        value: poly.value * sign_flip * sign_ups,
        log_scale: poly.log_scale + log_front,
    };
    total.to_complex()
}

/// Finite-difference leading coefficient of the polynomial average; equals
/// one to machine-ish accuracy since the average is monic of degree N.
pub fn leading_coefficient(spec: &EnsembleSpec) -> Result<f64> {
    let n = spec.n;
    // divided differences on n+1 points extract the x^n coefficient
    let pts: Vec<f64> = (0..=n).map(|k| 1.0 + k as f64).collect();
    let mut vals: Vec<f64> = Vec::with_capacity(n + 1);
    for &p in &pts {
        vals.push(avg_char_poly(p, spec)?.re);
    }
    let mut table = vals;
    for level in 1..=n {
        for i in 0..=(n - level) {
            table[i] = (table[i + 1] - table[i]) / (pts[i + level] - pts[i]);
        }
    }
    Ok(table[0])
}
