//! Direct sampling of the matrix ensembles and the empirical statistics
//! used as ground-truth oracles.
//!
//! Sampling is bit-reproducible and order-independent: every draw gets its
//! own generator keyed by (seed, stream, draw index), so worker count and
//! scheduling cannot change the output.

use crate::error::{Error, Result};
use crate::kernel_finite::{EnsembleKind, EnsembleSpec};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::io::{Read, Write};

/// Counter-based stream handle: distinct (seed, stream_id, draw) triples
/// yield independent generators.
#[derive(Clone, Copy, Debug)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    /// Generator for one draw; fully determined by the key triple.
    pub fn draw_rng(&self, draw: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut state = splitmix(self.seed ^ splitmix(self.stream_id ^ splitmix(draw)));
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

/// Complex Gaussian matrix with E|entry|^2 = 1 (each component N(0, 1/2)).
pub fn sample_ginibre<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}

/// Haar-unitary truncation: the top-left rows x cols block of an M x M
/// Haar matrix built by QR of a Ginibre draw with the phase correction.
pub fn sample_truncated_unitary<R: Rng>(
    m: usize,
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> Result<DMatrix<Complex64>> {
    if rows > m || cols > m {
        return Err(Error::SpecShape("truncation exceeds the unitary size".into()));
    }
    let g = sample_ginibre(m, m, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    // plain QR is not Haar: rotate columns by the phases of diag(R)
    for j in 0..m {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..m {
            q[(i, j)] *= phase;
        }
    }
    Ok(q.view((0, 0), (rows, cols)).into_owned())
}

/// Monte Carlo draws of squared singular values with provenance metadata.
#[derive(Clone, Debug)]
pub struct SampleBatch {
    pub spec: EnsembleSpec,
    pub seed: u64,
    pub draws: usize,
    /// draws x N, each row ascending.
    pub values: Vec<Vec<f64>>,
}

fn integer_dims(spec: &EnsembleSpec) -> Result<Vec<usize>> {
    spec.nu
        .iter()
        .map(|&v| {
            if v < 0.0 || v != v.round() {
                Err(Error::NonIntegerNu)
            } else {
                Ok(v as usize)
            }
        })
        .collect()
}

fn one_product_draw(spec: &EnsembleSpec, nus: &[usize], rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let n = spec.n;
    // G_0 + A: (N+nu_0) x N with sqrt(a_l) on the diagonal
    let mut b = sample_ginibre(n + nus[0], n, rng);
    for (l, &a) in spec.source.iter().enumerate() {
        b[(l, l)] += a.sqrt();
    }
    // accumulate with QR reorthogonalization each factor; the triangular
    // products carry the singular values
    let qr = b.qr();
    let mut q = qr.q();
    let mut t = qr.r(); // N x N upper triangular accumulation
    for l in 1..=spec.r {
        let factor = match spec.kind {
            EnsembleKind::Ginibre => sample_ginibre(n + nus[l], n + nus[l - 1], rng),
            EnsembleKind::TruncatedUnitary => {
                let m_l = n + (spec.mu[l - 1].round() as usize);
                if spec.mu[l - 1] != spec.mu[l - 1].round() {
                    return Err(Error::NonIntegerNu);
                }
                sample_truncated_unitary(m_l, n + nus[l], n + nus[l - 1], rng)?
            }
        };
        let prod = factor * &q;
        let qr = prod.qr();
        q = qr.q();
        t = qr.r() * t;
    }
    // eigenvalues of T* T are the squared singular values
    let h = t.adjoint() * &t;
    let eig = h.symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().map(|&x| x.max(0.0)).collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(vals)
}

/// Squared singular values of the full product, `draws` independent draws.
pub fn sample_product_ssv(spec: &EnsembleSpec, draws: usize, seed: u64) -> Result<SampleBatch> {
    let nus = integer_dims(spec)?;
    let stream = RngStream::new(seed, 0);
    let values: Result<Vec<Vec<f64>>> = (0..draws)
        .into_par_iter()
        .map(|d| {
            let mut rng = stream.draw_rng(d as u64);
            one_product_draw(spec, &nus, &mut rng)
        })
        .collect();
    Ok(SampleBatch { spec: spec.clone(), seed, draws, values: values? })
}

impl SampleBatch {
    /// Columnar binary format: magic "HELB", version, canonical spec text,
    /// seed, draws, N, then little-endian f64 values row-major.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"HELB")?;
        w.write_all(&1u16.to_le_bytes())?;
        let spec_text = self.spec.canonical_text();
        w.write_all(&(spec_text.len() as u32).to_le_bytes())?;
        w.write_all(spec_text.as_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&(self.draws as u64).to_le_bytes())?;
        w.write_all(&(self.spec.n as u32).to_le_bytes())?;
        for row in &self.values {
            for &v in row {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads the binary form back (spec text is carried as metadata only).
    pub fn read_binary<R: Read>(mut r: R) -> Result<(String, u64, Vec<Vec<f64>>)> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"HELB" {
            return Err(Error::Parse("bad magic".into()));
        }
        let mut b2 = [0u8; 2];
        r.read_exact(&mut b2)?;
        if u16::from_le_bytes(b2) != 1 {
            return Err(Error::Parse("unsupported version".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let len = u32::from_le_bytes(b4) as usize;
        let mut text = vec![0u8; len];
        r.read_exact(&mut text)?;
        let spec_text =
            String::from_utf8(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let seed = u64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let draws = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b4)?;
        let n = u32::from_le_bytes(b4) as usize;
        let mut values = Vec::with_capacity(draws);
        for _ in 0..draws {
            let mut row = Vec::with_capacity(n);
            for _ in 0..n {
                r.read_exact(&mut b8)?;
                row.push(f64::from_le_bytes(b8));
            }
            values.push(row);
        }
        Ok((spec_text, seed, values))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for row in &self.values {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Normalized histogram with per-bin standard errors.
#[derive(Clone, Debug)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub std_err: Vec<f64>,
}

/// Histogram of values/scaling pooled across draws, normalized to unit mass
/// per eigenvalue.
pub fn empirical_density(
    batch: &SampleBatch,
    scaling: f64,
    bins: usize,
    support: (f64, f64),
) -> Result<Histogram> {
    if bins < 10 {
        return Err(Error::SpecShape("need at least 10 bins".into()));
    }
    let (lo, hi) = support;
    if !(hi > lo) {
        return Err(Error::EmptySupport);
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut total = 0usize;
    for row in &batch.values {
        for &v in row {
            let x = v / scaling;
            total += 1;
            if x >= lo && x < hi {
                counts[((x - lo) / width) as usize] += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::EmptySupport);
    }
    let mut edges = Vec::with_capacity(bins + 1);
    for k in 0..=bins {
        edges.push(lo + width * k as f64);
    }
    let norm = 1.0 / (total as f64 * width);
    let density: Vec<f64> = counts.iter().map(|&c| c as f64 * norm).collect();
    let std_err: Vec<f64> = counts
        .iter()
        .map(|&c| {
            let p = c as f64 / total as f64;
            (p * (1.0 - p) / total as f64).sqrt() / width
        })
        .collect();
    Ok(Histogram { edges, density, std_err })
}

impl Histogram {
    /// L1 distance between the histogram and a reference density over the
    /// histogram support. The reference is averaged within each bin (8-point
    /// quadrature), which matters wherever it has an integrable singularity.
    pub fn l1_distance<F: Fn(f64) -> f64>(&self, reference: F) -> f64 {
        let (xs, ws) = crate::contour::gauss_legendre(12);
        let mut l1 = 0.0;
        for (k, &d) in self.density.iter().enumerate() {
            let (lo, hi) = (self.edges[k], self.edges[k + 1]);
            let w = hi - lo;
            let mut avg = 0.0;
            if k == 0 {
                // cubic map absorbs an integrable power singularity at the
                // left edge of the support (x^p with p >= -2/3)
                for (x, wt) in xs.iter().zip(ws.iter()) {
                    let t = 0.5 * (x + 1.0);
                    avg += wt * 0.5 * 3.0 * t * t * reference(lo + w * t * t * t);
                }
            } else {
                for (x, wt) in xs.iter().zip(ws.iter()) {
                    avg += wt * 0.5 * reference(0.5 * (lo + hi) + 0.5 * w * x);
                }
            }
            l1 += (d - avg).abs() * w;
        }
        l1
    }
}

/// Estimate with a jackknife error bar and a heavy-tail warning.
#[derive(Clone, Copy, Debug)]
pub struct McEstimate {
    pub value: Complex64,
    pub std_err: f64,
    pub heavy_tail: bool,
}

/// Functionals of the eigenvalue configuration whose ensemble averages the
/// analytic modules predict.
pub enum McFunctional {
    /// prod (x - x_l)
    CharPoly(f64),
    /// prod 1/(z - x_l)
    InvCharPoly(Complex64),
    /// prod (x - x_l)/(z - x_l)
    Ratio(f64, Complex64),
    /// Ordered tuples of distinct eigenvalues falling in the given boxes.
    KPointIndicator(Vec<(f64, f64)>),
}

/// Median-of-means estimate (20 batches) with jackknife error bars.
pub fn mc_expectation(batch: &SampleBatch, functional: &McFunctional) -> Result<McEstimate> {
    let n_batches = 20usize.min(batch.draws.max(1));
    let per = |row: &Vec<f64>| -> Complex64 {
        match functional {
            McFunctional::CharPoly(x) => {
                row.iter().map(|&v| Complex64::new(x - v, 0.0)).product()
            }
            McFunctional::InvCharPoly(z) => row.iter().map(|&v| 1.0 / (z - v)).product(),
            McFunctional::Ratio(x, z) => {
                row.iter().map(|&v| (x - v) / (z - v)).product()
            }
            McFunctional::KPointIndicator(boxes) => {
                let count = count_ordered_tuples(row, boxes);
                Complex64::new(count as f64, 0.0)
            }
        }
    };
    let vals: Vec<Complex64> = batch.values.iter().map(per).collect();
    // kurtosis of |f| as the heavy-tail diagnostic
    let mags: Vec<f64> = vals.iter().map(|v| v.norm()).collect();
    let mean_m = mags.iter().sum::<f64>() / mags.len() as f64;
    let var_m =
        mags.iter().map(|m| (m - mean_m) * (m - mean_m)).sum::<f64>() / mags.len() as f64;
    let kurt = if var_m > 0.0 {
        mags.iter()
            .map(|m| (m - mean_m).powi(4))
            .sum::<f64>()
            / (mags.len() as f64 * var_m * var_m)
    } else {
        0.0
    };

    // median of batch means, component-wise
    let mut batch_means = Vec::with_capacity(n_batches);
    for b in 0..n_batches {
        let chunk: Vec<&Complex64> = vals
            .iter()
            .enumerate()
            .filter(|(i, _)| i % n_batches == b)
            .map(|(_, v)| v)
            .collect();
        let m: Complex64 = chunk.iter().copied().sum::<Complex64>() / chunk.len() as f64;
        batch_means.push(m);
    }
    let median = |mut xs: Vec<f64>| -> f64 {
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = xs.len();
        if n % 2 == 1 {
            xs[n / 2]
        } else {
            0.5 * (xs[n / 2 - 1] + xs[n / 2])
        }
    };
    let value = Complex64::new(
        median(batch_means.iter().map(|m| m.re).collect()),
        median(batch_means.iter().map(|m| m.im).collect()),
    );
    // jackknife over batch means
    let mean_all: Complex64 =
        batch_means.iter().copied().sum::<Complex64>() / n_batches as f64;
    let var: f64 = batch_means
        .iter()
        .map(|m| (m - mean_all).norm_sqr())
        .sum::<f64>()
        / (n_batches as f64 * (n_batches as f64 - 1.0).max(1.0));
    Ok(McEstimate { value, std_err: var.sqrt(), heavy_tail: kurt > 1e4 })
}

fn count_ordered_tuples(row: &[f64], boxes: &[(f64, f64)]) -> usize {
    // ordered tuples of distinct indices with x_{i_k} in box k
    fn rec(row: &[f64], boxes: &[(f64, f64)], used: &mut Vec<bool>, depth: usize) -> usize {
        if depth == boxes.len() {
            return 1;
        }
        let (lo, hi) = boxes[depth];
        let mut c = 0;
        for (i, &x) in row.iter().enumerate() {
            if !used[i] && x >= lo && x < hi {
                used[i] = true;
                c += rec(row, boxes, used, depth + 1);
                used[i] = false;
            }
        }
        c
    }
    let mut used = vec![false; row.len()];
    rec(row, boxes, &mut used, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_second_moment() {
        let stream = RngStream::new(7, 0);
        let mut sum = 0.0;
        let draws = 100_000;
        for d in 0..draws {
            let mut rng = stream.draw_rng(d);
            let g = sample_ginibre(1, 1, &mut rng);
            sum += g[(0, 0)].norm_sqr();
        }
        let mean = sum / draws as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean |g|^2 = {mean}");
    }

    #[test]
    fn trace_second_moment_2x2() {
        let stream = RngStream::new(11, 0);
        let mut sum = 0.0;
        let draws = 10_000;
        for d in 0..draws {
            let mut rng = stream.draw_rng(d);
            let g = sample_ginibre(2, 2, &mut rng);
            sum += (g.adjoint() * &g).trace().re;
        }
        let mean = sum / draws as f64;
        assert!((mean - 4.0).abs() < 0.05, "E tr G*G = {mean}");
    }

    #[test]
    fn haar_unitary_columns_orthonormal() {
        let stream = RngStream::new(3, 1);
        let mut rng = stream.draw_rng(0);
        let u = sample_truncated_unitary(5, 5, 5, &mut rng).unwrap();
        let id = u.adjoint() * &u;
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn truncation_1x1_of_2x2_is_uniform() {
        // |t|^2 of the 1x1 truncation of a 2x2 Haar matrix is uniform(0,1):
        // compare the empirical CDF at deciles (KS-style)
        let stream = RngStream::new(42, 0);
        let draws = 100_000;
        let mut vals = Vec::with_capacity(draws);
        for d in 0..draws {
            let mut rng = stream.draw_rng(d as u64);
            let t = sample_truncated_unitary(2, 1, 1, &mut rng).unwrap();
            vals.push(t[(0, 0)].norm_sqr());
        }
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks: f64 = 0.0;
        for (i, &v) in vals.iter().enumerate() {
            let emp = (i + 1) as f64 / draws as f64;
            ks = ks.max((emp - v).abs());
        }
        // 1% critical value: 1.63 / sqrt(n)
        assert!(ks < 1.63 / (draws as f64).sqrt(), "KS statistic {ks}");
    }

    #[test]
    fn truncation_singular_values_contract() {
        let stream = RngStream::new(5, 2);
        for d in 0..50 {
            let mut rng = stream.draw_rng(d);
            let t = sample_truncated_unitary(6, 3, 2, &mut rng).unwrap();
            let h = t.adjoint() * &t;
            let eig = h.symmetric_eigen();
            for &l in eig.eigenvalues.iter() {
                assert!(l <= 1.0 + 1e-12, "||T|| must be <= 1, got sv^2 = {l}");
            }
        }
    }

    #[test]
    fn exponential_law_n1() {
        let spec = EnsembleSpec::ginibre(1, vec![0.0], vec![0.0]).unwrap();
        let batch = sample_product_ssv(&spec, 100_000, 13).unwrap();
        let mean: f64 = batch.values.iter().map(|r| r[0]).sum::<f64>() / 100_000.0;
        assert!((mean - 1.0).abs() < 0.015, "mean {mean}");
    }

    #[test]
    fn reproducible_across_calls() {
        let spec = EnsembleSpec::ginibre(2, vec![0.0, 1.0], vec![1.0, 2.0]).unwrap();
        let a = sample_product_ssv(&spec, 64, 99).unwrap();
        let b = sample_product_ssv(&spec, 64, 99).unwrap();
        assert_eq!(a.values, b.values);
        // rows ascending
        for row in &a.values {
            assert!(row.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn mean_trace_identity_r0() {
        // E[sum x_l] = N(N+nu0) + sum a_l for r = 0
        let n = 8;
        let source: Vec<f64> = (0..n).map(|k| 0.5 * k as f64).collect();
        let spec = EnsembleSpec::ginibre(n, vec![1.0], source.clone()).unwrap();
        let draws = 20_000;
        let batch = sample_product_ssv(&spec, draws, 21).unwrap();
        let mean: f64 =
            batch.values.iter().map(|r| r.iter().sum::<f64>()).sum::<f64>() / draws as f64;
        let expect = (n as f64) * (n as f64 + 1.0) + source.iter().sum::<f64>();
        // crude 3 sigma bound via the sample variance
        let var: f64 = batch
            .values
            .iter()
            .map(|r| {
                let s: f64 = r.iter().sum();
                (s - mean) * (s - mean)
            })
            .sum::<f64>()
            / draws as f64;
        let sigma = (var / draws as f64).sqrt();
        assert!(
            (mean - expect).abs() < 3.0 * sigma + 0.02 * expect,
            "mean {mean} vs {expect} (sigma {sigma})"
        );
    }

    #[test]
    fn shifted_mean_first_moment() {
        // r=0, a = bN: mean of xbar/N -> 1 + b at large N
        let n = 64;
        let b = 0.5;
        let spec = EnsembleSpec::ginibre(n, vec![0.0], vec![b * n as f64; n]).unwrap();
        let draws = 200;
        let batch = sample_product_ssv(&spec, draws, 17).unwrap();
        let mean: f64 = batch
            .values
            .iter()
            .map(|r| r.iter().sum::<f64>() / (n * n) as f64)
            .sum::<f64>()
            / draws as f64;
        assert!(
            (mean - (1.0 + b)).abs() < 0.02 * (1.0 + b),
            "mean {mean} vs {}",
            1.0 + b
        );
    }

    #[test]
    fn histogram_flat_on_uniform_input() {
        let spec = EnsembleSpec::ginibre(1, vec![0.0], vec![0.0]).unwrap();
        // synthetic uniform values
        let batch = SampleBatch {
            spec,
            seed: 0,
            draws: 50_000,
            values: (0..50_000)
                .map(|k| vec![(k as f64 + 0.5) / 50_000.0])
                .collect(),
        };
        let h = empirical_density(&batch, 1.0, 20, (0.0, 1.0)).unwrap();
        for d in &h.density {
            assert!((d - 1.0).abs() < 0.01);
        }
        let l1 = h.l1_distance(|_| 1.0);
        assert!(l1 < 0.01);
    }

    #[test]
    fn binary_roundtrip() {
        let spec = EnsembleSpec::ginibre(2, vec![0.0], vec![1.0, 0.5]).unwrap();
        let batch = sample_product_ssv(&spec, 16, 5).unwrap();
        let mut buf = Vec::new();
        batch.write_binary(&mut buf).unwrap();
        let (text, seed, values) = SampleBatch::read_binary(&buf[..]).unwrap();
        assert_eq!(text, batch.spec.canonical_text());
        assert_eq!(seed, 5);
        assert_eq!(values, batch.values);
    }

    #[test]
    fn char_poly_sanity_far_from_support() {
        // E prod (x - x_l) ~ x^N (1 + O(N E x_1 / x)) far above the support
        let spec = EnsembleSpec::ginibre(2, vec![0.0], vec![0.0, 0.0]).unwrap();
        let batch = sample_product_ssv(&spec, 20_000, 31).unwrap();
        let x = 1e4;
        let est = mc_expectation(&batch, &McFunctional::CharPoly(x)).unwrap();
        let rel = (est.value.re - x * x) / (x * x);
        assert!(rel.abs() < 0.01, "rel deviation {rel}");
    }

    #[test]
    fn non_integer_nu_rejected() {
        let spec = EnsembleSpec::ginibre(2, vec![0.5], vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            sample_product_ssv(&spec, 4, 1),
            Err(Error::NonIntegerNu)
        ));
    }
}
