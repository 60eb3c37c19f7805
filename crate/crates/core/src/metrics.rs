//! Distances between sample clouds and reference measures.
//!
//! Total variation is `∫|p − q|` (range `[0, 2]`) everywhere in this crate.
//! Densities of sample clouds are Gaussian kernel estimates evaluated on a
//! shared grid with linear binning, and every TV estimate carries a
//! bootstrap standard error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::gibbs::GibbsMeasure;

/// A finite sample cloud in `R^d`, optionally weighted.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    dim: usize,
    data: Vec<f64>,
    weights: Option<Vec<f64>>,
}

impl EmpiricalMeasure {
    /// `data` holds `n` rows of length `dim`, row-major.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.is_empty() || data.len() % dim != 0 {
            return Err(Error::arg(format!(
                "sample data of length {} cannot hold rows of dimension {dim}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("samples must be finite"));
        }
        Ok(Self {
            dim,
            data,
            weights: None,
        })
    }

    pub fn from_scalars(xs: Vec<f64>) -> Result<Self> {
        Self::new(1, xs)
    }

    /// Attaches positive weights, renormalized to sum to one.
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::arg("one weight per sample is required"));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::arg("weights must be positive and finite"));
        }
        let total: f64 = weights.iter().sum();
        self.weights = Some(weights.into_iter().map(|w| w / total).collect());
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn weight(&self, i: usize) -> f64 {
        match &self.weights {
            Some(w) => w[i],
            None => 1.0 / self.len() as f64,
        }
    }

    /// Coordinate `k` of every sample.
    pub fn marginal(&self, k: usize) -> Vec<f64> {
        self.rows().map(|r| r[k]).collect()
    }

    /// `⟨x_i, u⟩` for every sample.
    pub fn project(&self, u: &[f64]) -> Vec<f64> {
        self.rows().map(|r| r.iter().zip(u).map(|(a, b)| a * b).sum()).collect()
    }

    fn subset(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            dim: self.dim,
            data,
            weights: None,
        }
    }
}

/// A value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// Robust Silverman rule per axis.
    Auto,
    /// The Silverman bandwidth multiplied by a factor.
    Scaled(f64),
    /// The same bandwidth on every axis.
    Fixed(f64),
}

/// How the reference density is treated in [`tv_empirical_vs_density`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReferenceSmoothing {
    /// Convolve the reference with the same kernel as the samples, so the
    /// smoothing bias of the estimate cancels.
    #[default]
    Matched,
    /// Compare against the reference density as is.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvOptions {
    pub bandwidth: Bandwidth,
    pub bootstrap: usize,
    pub seed: u64,
    pub grid_points: usize,
    pub reference: ReferenceSmoothing,
}

impl Default for TvOptions {
    fn default() -> Self {
        Self {
            bandwidth: Bandwidth::Auto,
            bootstrap: 50,
            seed: 0,
            grid_points: 512,
            reference: ReferenceSmoothing::Matched,
        }
    }
}

const MIN_TV_SAMPLES: usize = 100;

fn weighted_quantile(sorted: &[(f64, f64)], q: f64) -> f64 {
    let mut acc = 0.0;
    for &(x, w) in sorted {
        acc += w;
        if acc >= q {
            return x;
        }
    }
    sorted.last().map_or(0.0, |p| p.0)
}

/// Robust Silverman bandwidth per axis.
pub fn silverman_bandwidth(p: &EmpiricalMeasure) -> Vec<f64> {
    let d = p.dim();
    let n_eff = match p.weights() {
        Some(w) => 1.0 / w.iter().map(|v| v * v).sum::<f64>(),
        None => p.len() as f64,
    };
    let (factor, power) = if d == 1 { (0.9, -0.2) } else { (1.0, -1.0 / (d as f64 + 4.0)) };
    (0..d)
        .map(|k| {
            let mut pts: Vec<(f64, f64)> = p.rows().enumerate().map(|(i, r)| (r[k], p.weight(i))).collect();
            let mean: f64 = pts.iter().map(|(x, w)| x * w).sum();
            let var: f64 = pts.iter().map(|(x, w)| w * (x - mean) * (x - mean)).sum::<f64>() * n_eff / (n_eff - 1.0).max(1.0);
            let sd = var.max(0.0).sqrt();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let iqr = weighted_quantile(&pts, 0.75) - weighted_quantile(&pts, 0.25);
            let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
            factor * spread * n_eff.powf(power)
        })
        .collect()
}

fn resolve_bandwidth(p: &EmpiricalMeasure, bw: Bandwidth) -> Result<Vec<f64>> {
    match bw {
        Bandwidth::Auto => Ok(silverman_bandwidth(p)),
        Bandwidth::Scaled(s) if s > 0.0 => Ok(silverman_bandwidth(p).into_iter().map(|h| h * s).collect()),
        Bandwidth::Fixed(h) if h > 0.0 => Ok(vec![h; p.dim()]),
        other => Err(Error::arg(format!("bandwidth must be positive, got {other:?}"))),
    }
}

/// A regular grid with `n` nodes per axis.
#[derive(Debug, Clone)]
struct Grid {
    lo: Vec<f64>,
    step: Vec<f64>,
    n: usize,
}

impl Grid {
    fn new(lo: Vec<f64>, hi: Vec<f64>, n: usize) -> Self {
        let step = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| {
                let w = h - l;
                if w > 0.0 {
                    w / (n - 1) as f64
                } else {
                    1.0 / (n - 1) as f64
                }
            })
            .collect();
        Self { lo, step, n }
    }

    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn cells(&self) -> usize {
        self.n.pow(self.dim() as u32)
    }

    fn cell_volume(&self) -> f64 {
        self.step.iter().product()
    }

    fn node(&self, flat: usize, out: &mut [f64]) {
        let mut r = flat;
        for j in 0..self.dim() {
            out[j] = self.lo[j] + self.step[j] * (r % self.n) as f64;
            r /= self.n;
        }
    }

    /// Linear binning of weighted points onto the nodes (axis 0 fastest).
    fn bin(&self, p: &EmpiricalMeasure, idx: Option<&[usize]>) -> Vec<f64> {
        let d = self.dim();
        let n = self.n;
        let mut mass = vec![0.0; self.cells()];
        let mut put = |row: &[f64], w: f64| {
            let mut base = [0usize; 2];
            let mut frac = [0.0f64; 2];
            for j in 0..d {
                let u = ((row[j] - self.lo[j]) / self.step[j]).clamp(0.0, (n - 1) as f64);
                let k = (u.floor() as usize).min(n - 2);
                base[j] = k;
                frac[j] = u - k as f64;
            }
            if d == 1 {
                mass[base[0]] += w * (1.0 - frac[0]);
                mass[base[0] + 1] += w * frac[0];
            } else {
                for (dx, wx) in [(0, 1.0 - frac[0]), (1, frac[0])] {
                    for (dy, wy) in [(0, 1.0 - frac[1]), (1, frac[1])] {
                        mass[(base[1] + dy) * n + base[0] + dx] += w * wx * wy;
                    }
                }
            }
        };
        match idx {
            Some(ix) => {
                let w = 1.0 / ix.len() as f64;
                for &i in ix {
                    put(p.row(i), w);
                }
            }
            None => {
                for (i, r) in p.rows().enumerate() {
                    put(r, p.weight(i));
                }
            }
        }
        mass
    }
}

/// Normalized discrete Gaussian kernel truncated at five bandwidths.
fn kernel(h: f64, step: f64, n: usize) -> Vec<f64> {
    if h < 0.05 * step {
        return vec![1.0];
    }
    let half = ((5.0 * h / step).ceil() as usize).min(n - 1);
    let mut k: Vec<f64> = (0..=2 * half)
        .map(|i| {
            let u = (i as f64 - half as f64) * step / h;
            (-0.5 * u * u).exp()
        })
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

fn convolve_line(src: &[f64], k: &[f64], out: &mut [f64]) {
    let half = k.len() / 2;
    let n = src.len();
    out.fill(0.0);
    for (i, &m) in src.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(n - 1);
        for (j, o) in out.iter_mut().enumerate().take(hi + 1).skip(lo) {
            *o += m * k[j + half - i];
        }
    }
}

/// Smooths binned masses with a separable product kernel. The result holds
/// masses per cell (divide by the cell volume for a density).
fn smooth(grid: &Grid, mass: &[f64], h: &[f64]) -> Vec<f64> {
    let n = grid.n;
    match grid.dim() {
        1 => {
            let k = kernel(h[0], grid.step[0], n);
            let mut out = vec![0.0; n];
            convolve_line(mass, &k, &mut out);
            out
        }
        _ => {
            let kx = kernel(h[0], grid.step[0], n);
            let ky = kernel(h[1], grid.step[1], n);
            let mut tmp = vec![0.0; n * n];
            for r in 0..n {
                convolve_line(&mass[r * n..(r + 1) * n], &kx, &mut tmp[r * n..(r + 1) * n]);
            }
            let mut out = vec![0.0; n * n];
            let mut col = vec![0.0; n];
            let mut col_out = vec![0.0; n];
            for c in 0..n {
                for r in 0..n {
                    col[r] = tmp[r * n + c];
                }
                convolve_line(&col, &ky, &mut col_out);
                for r in 0..n {
                    out[r * n + c] = col_out[r];
                }
            }
            out
        }
    }
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>().clamp(0.0, 2.0)
}

fn check_tv_input(p: &EmpiricalMeasure, opts: &TvOptions) -> Result<()> {
    if p.dim() > 2 {
        return Err(Error::UnsupportedDimension {
            dim: p.dim(),
            hint: "density-based TV supports d <= 2; use w1_sliced instead",
        });
    }
    if p.len() < MIN_TV_SAMPLES {
        return Err(Error::arg(format!(
            "TV estimation needs at least {MIN_TV_SAMPLES} samples, got {}",
            p.len()
        )));
    }
    if opts.grid_points < 16 {
        return Err(Error::arg("TV grid needs at least 16 points per axis"));
    }
    Ok(())
}

fn sample_range(p: &EmpiricalMeasure, k: usize) -> (f64, f64) {
    p.rows()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r[k]), hi.max(r[k])))
}

fn bootstrap_indices(rng: &mut ChaCha8Rng, p: &EmpiricalMeasure) -> Vec<usize> {
    let n = p.len();
    match p.weights() {
        None => (0..n).map(|_| rng.random_range(0..n)).collect(),
        Some(w) => {
            let mut cdf = Vec::with_capacity(n);
            let mut acc = 0.0;
            for v in w {
                acc += v;
                cdf.push(acc);
            }
            (0..n)
                .map(|_| {
                    let u: f64 = rng.random::<f64>() * acc;
                    cdf.partition_point(|&c| c < u).min(n - 1)
                })
                .collect()
        }
    }
}

fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// TV between two sample clouds through kernel density estimates on a
/// shared grid spanning the pooled range padded by three bandwidths.
pub fn tv_empirical(p: &EmpiricalMeasure, q: &EmpiricalMeasure, opts: &TvOptions) -> Result<Estimate> {
    check_tv_input(p, opts)?;
    check_tv_input(q, opts)?;
    if p.dim() != q.dim() {
        return Err(Error::arg("sample clouds live in different dimensions"));
    }
    let d = p.dim();
    let hp = resolve_bandwidth(p, opts.bandwidth)?;
    let hq = resolve_bandwidth(q, opts.bandwidth)?;
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    for k in 0..d {
        let (pl, ph) = sample_range(p, k);
        let (ql, qh) = sample_range(q, k);
        let pad = 3.0 * hp[k].max(hq[k]);
        lo[k] = pl.min(ql) - pad;
        hi[k] = ph.max(qh) + pad;
        if hi[k] - lo[k] <= 1e-12 * (1.0 + lo[k].abs()) {
            lo[k] -= 0.5;
            hi[k] += 0.5;
        }
    }
    let grid = Grid::new(lo, hi, opts.grid_points);
    let fp = smooth(&grid, &grid.bin(p, None), &hp);
    let fq = smooth(&grid, &grid.bin(q, None), &hq);
    let value = l1(&fp, &fq);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut boots = Vec::with_capacity(opts.bootstrap);
    for _ in 0..opts.bootstrap {
        let ip = bootstrap_indices(&mut rng, p);
        let iq = bootstrap_indices(&mut rng, q);
        let bp = smooth(&grid, &grid.bin(&p.subset(&ip), None), &hp);
        let bq = smooth(&grid, &grid.bin(&q.subset(&iq), None), &hq);
        boots.push(l1(&bp, &bq));
    }
    Ok(Estimate {
        value,
        std_error: std_dev(&boots),
    })
}

/// TV between a sample cloud and a Gibbs measure. The grid covers the
/// region where the reference density exceeds 1e-12 of its peak together
/// with the padded sample range.
pub fn tv_empirical_vs_density(p: &EmpiricalMeasure, g: &GibbsMeasure, opts: &TvOptions) -> Result<Estimate> {
    check_tv_input(p, opts)?;
    if p.dim() != g.dim() {
        return Err(Error::arg("samples and reference measure live in different dimensions"));
    }
    let d = p.dim();
    let h = resolve_bandwidth(p, opts.bandwidth)?;
    let support = g.support_box(1e-12)?;
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    for k in 0..d {
        let (pl, ph) = sample_range(p, k);
        lo[k] = support.lo[k].min(pl - 3.0 * h[k]);
        hi[k] = support.hi[k].max(ph + 3.0 * h[k]);
    }
    let grid = Grid::new(lo, hi, opts.grid_points);
    let vol = grid.cell_volume();
    let z = g.z()?;
    let mut x = vec![0.0; d];
    let mut reference: Vec<f64> = (0..grid.cells())
        .map(|flat| {
            grid.node(flat, &mut x);
            z * g.log_unnormalized(&x).exp() * vol
        })
        .collect();
    if opts.reference == ReferenceSmoothing::Matched {
        reference = smooth(&grid, &reference, &h);
    }
    let fp = smooth(&grid, &grid.bin(p, None), &h);
    let value = l1(&fp, &reference);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut boots = Vec::with_capacity(opts.bootstrap);
    for _ in 0..opts.bootstrap {
        let ip = bootstrap_indices(&mut rng, p);
        let bp = smooth(&grid, &grid.bin(&p.subset(&ip), None), &h);
        boots.push(l1(&bp, &reference));
    }
    Ok(Estimate {
        value,
        std_error: std_dev(&boots),
    })
}

fn sorted_with_weights(p: &EmpiricalMeasure) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = p.rows().enumerate().map(|(i, r)| (r[0], p.weight(i))).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

/// Exact Wasserstein-1 distance between two 1D clouds: the mean absolute
/// difference of sorted samples for equal unweighted sizes, otherwise
/// `∫|F − G|` over the merged support.
pub fn w1_1d(p: &EmpiricalMeasure, q: &EmpiricalMeasure) -> Result<f64> {
    if p.dim() != 1 || q.dim() != 1 {
        return Err(Error::arg("w1_1d needs one-dimensional samples"));
    }
    if p.len() == q.len() && p.weights().is_none() && q.weights().is_none() {
        let mut a = p.as_slice().to_vec();
        let mut b = q.as_slice().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        return Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64);
    }
    Ok(w1_weighted(&sorted_with_weights(p), &sorted_with_weights(q)))
}

fn w1_weighted(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let mut x_prev = a[0].0.min(b[0].0);
    let mut total = 0.0;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(u), Some(v)) => u.0.min(v.0),
            (Some(u), None) => u.0,
            (None, Some(v)) => v.0,
            (None, None) => unreachable!(),
        };
        total += (fa - fb).abs() * (x - x_prev);
        while i < a.len() && a[i].0 == x {
            fa += a[i].1;
            i += 1;
        }
        while j < b.len() && b[j].0 == x {
            fb += b[j].1;
            j += 1;
        }
        x_prev = x;
    }
    total
}

/// Mean of [`w1_1d`] over `n_slices` uniformly random unit directions.
pub fn w1_sliced(p: &EmpiricalMeasure, q: &EmpiricalMeasure, n_slices: usize, seed: u64) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::arg("sample clouds live in different dimensions"));
    }
    if n_slices == 0 {
        return Err(Error::arg("need at least one slice"));
    }
    let d = p.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = vec![0.0; d];
    let mut total = 0.0;
    for _ in 0..n_slices {
        loop {
            for v in u.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-12 {
                u.iter_mut().for_each(|v| *v /= norm);
                break;
            }
        }
        let pp = project_measure(p, &u)?;
        let qq = project_measure(q, &u)?;
        total += w1_1d(&pp, &qq)?;
    }
    Ok(total / n_slices as f64)
}

fn project_measure(p: &EmpiricalMeasure, u: &[f64]) -> Result<EmpiricalMeasure> {
    let m = EmpiricalMeasure::from_scalars(p.project(u))?;
    match p.weights() {
        Some(w) => m.with_weights(w.to_vec()),
        None => Ok(m),
    }
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Exact `∫|φ_{m1,s1} − φ_{m2,s2}|` from the density crossing points.
pub fn tv_gaussian_1d(m1: f64, s1: f64, m2: f64, s2: f64) -> Result<f64> {
    if !(s1 > 0.0 && s2 > 0.0) || !s1.is_finite() || !s2.is_finite() {
        return Err(Error::arg(format!("Gaussian scales must be positive, got {s1} and {s2}")));
    }
    if !m1.is_finite() || !m2.is_finite() {
        return Err(Error::arg("Gaussian means must be finite"));
    }
    // log φ1 − log φ2 = A x² + B x + C
    let a = 0.5 / (s2 * s2) - 0.5 / (s1 * s1);
    let b = m1 / (s1 * s1) - m2 / (s2 * s2);
    let c = 0.5 * m2 * m2 / (s2 * s2) - 0.5 * m1 * m1 / (s1 * s1) + (s2 / s1).ln();
    let mut roots = Vec::new();
    if a.abs() <= 1e-14 * (a.abs() + b.abs() + c.abs()) {
        if b != 0.0 {
            roots.push(-c / b);
        } else {
            return Ok(0.0);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc > 0.0 {
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            roots.push(q / a);
            if q != 0.0 {
                roots.push(c / q);
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    let f1 = |x: f64| normal_cdf((x - m1) / s1);
    let f2 = |x: f64| normal_cdf((x - m2) / s2);
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend(roots);
    edges.push(f64::INFINITY);
    let cdf = |f: &dyn Fn(f64) -> f64, x: f64| {
        if x == f64::NEG_INFINITY {
            0.0
        } else if x == f64::INFINITY {
            1.0
        } else {
            f(x)
        }
    };
    let total: f64 = edges
        .windows(2)
        .map(|w| ((cdf(&f1, w[1]) - cdf(&f1, w[0])) - (cdf(&f2, w[1]) - cdf(&f2, w[0]))).abs())
        .sum();
    Ok(total.clamp(0.0, 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_abs, QuadOptions};
    use proptest::prelude::*;
    use rand::Rng;

    fn normal_cloud(n: usize, mean: f64, seed: u64) -> EmpiricalMeasure {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        EmpiricalMeasure::from_scalars((0..n).map(|_| mean + rng.sample::<f64, _>(StandardNormal)).collect()).unwrap()
    }

    fn cloud(xs: &[f64]) -> EmpiricalMeasure {
        EmpiricalMeasure::from_scalars(xs.to_vec()).unwrap()
    }

    #[test]
    fn empirical_measure_validation() {
        assert!(EmpiricalMeasure::new(2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(EmpiricalMeasure::new(1, vec![f64::NAN]).is_err());
        assert!(cloud(&[1.0, 2.0]).with_weights(vec![1.0, -1.0]).is_err());
        let w = cloud(&[1.0, 2.0]).with_weights(vec![1.0, 3.0]).unwrap();
        assert_eq!(w.weights().unwrap(), &[0.25, 0.75]);
    }

    #[test]
    fn gaussian_tv_closed_form() {
        assert_eq!(tv_gaussian_1d(0.3, 1.2, 0.3, 1.2).unwrap(), 0.0);
        let v = tv_gaussian_1d(0.0, 1.0, 1.0, 1.0).unwrap();
        assert!((v - 2.0 * (2.0 * normal_cdf(0.5) - 1.0)).abs() < 1e-12);
        assert!((v - 0.7659).abs() < 1e-4);
        let phi = |x: f64, s: f64| (-0.5 * x * x / (s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
        let quad = integrate_abs(|x| phi(x, 1.0) - phi(x, 2.0), -40.0, 40.0, 4000, &QuadOptions::default()).unwrap();
        assert!((tv_gaussian_1d(0.0, 1.0, 0.0, 2.0).unwrap() - quad.value).abs() < 1e-8);
        assert!(tv_gaussian_1d(0.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn w1_examples() {
        assert_eq!(w1_1d(&cloud(&[0.0, 1.0]), &cloud(&[0.0, 1.0])).unwrap(), 0.0);
        assert_eq!(w1_1d(&cloud(&[0.0, 2.0]), &cloud(&[1.0, 3.0])).unwrap(), 1.0);
        let p = normal_cloud(100_000, 0.0, 1);
        let q = normal_cloud(100_000, 2.0, 2);
        assert!((w1_1d(&p, &q).unwrap() - 2.0).abs() < 0.02);
        // unequal sizes use the CDF form
        let v = w1_1d(&cloud(&[0.0]), &cloud(&[1.0, 3.0])).unwrap();
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn sliced_w1_point_masses() {
        let p = EmpiricalMeasure::new(2, vec![0.0, 0.0]).unwrap();
        let q = EmpiricalMeasure::new(2, vec![3.0, 4.0]).unwrap();
        assert_eq!(w1_sliced(&p, &p, 10, 0).unwrap(), 0.0);
        let v = w1_sliced(&p, &q, 20_000, 9).unwrap();
        let expected = 5.0 * 2.0 / std::f64::consts::PI;
        assert!((v / expected - 1.0).abs() < 0.02, "{v}");
        assert_eq!(w1_sliced(&p, &q, 100, 3).unwrap(), w1_sliced(&p, &q, 100, 3).unwrap());
    }

    #[test]
    fn sliced_w1_rotation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut pts = Vec::new();
        for _ in 0..2000 {
            pts.push(rng.sample::<f64, _>(StandardNormal));
            pts.push(0.3 * rng.sample::<f64, _>(StandardNormal));
        }
        let shifted: Vec<f64> = pts.chunks(2).flat_map(|r| [r[0] + 1.0, r[1]]).collect();
        let rot = |v: &[f64]| -> Vec<f64> {
            let (c, s) = (0.6f64, 0.8f64);
            v.chunks(2).flat_map(|r| [c * r[0] - s * r[1], s * r[0] + c * r[1]]).collect()
        };
        let p = EmpiricalMeasure::new(2, pts.clone()).unwrap();
        let q = EmpiricalMeasure::new(2, shifted.clone()).unwrap();
        let pr = EmpiricalMeasure::new(2, rot(&pts)).unwrap();
        let qr = EmpiricalMeasure::new(2, rot(&shifted)).unwrap();
        let a = w1_sliced(&p, &q, 500, 1).unwrap();
        let b = w1_sliced(&pr, &qr, 500, 1).unwrap();
        assert!((a - b).abs() < 0.05, "{a} {b}");
    }

    #[test]
    fn tv_identical_and_disjoint() {
        let p = normal_cloud(1000, 0.0, 3);
        let same = tv_empirical(&p, &p, &TvOptions::default()).unwrap();
        assert_eq!(same.value, 0.0);
        let far = normal_cloud(1000, 100.0, 4);
        let v = tv_empirical(&p, &far, &TvOptions::default()).unwrap();
        assert!((v.value - 2.0).abs() < 1e-3, "{}", v.value);
        assert!(tv_empirical(&cloud(&[0.0; 10]), &p, &TvOptions::default()).is_err());
        let p3 = EmpiricalMeasure::new(3, vec![0.0; 300]).unwrap();
        assert!(matches!(
            tv_empirical(&p3, &p3, &TvOptions::default()),
            Err(Error::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn tv_gaussian_fixtures() {
        let p = normal_cloud(10_000, 0.0, 10);
        let q = normal_cloud(10_000, 0.0, 11);
        let noise = tv_empirical(&p, &q, &TvOptions::default()).unwrap();
        assert!(noise.value <= 0.08, "{}", noise.value);
        let r = normal_cloud(10_000, 1.0, 12);
        let shift = tv_empirical(&p, &r, &TvOptions::default()).unwrap();
        assert!((shift.value - 0.7659).abs() <= 0.08, "{}", shift.value);
        assert!(shift.std_error > 0.0);
    }

    #[test]
    fn tv_bandwidth_stability() {
        let p = normal_cloud(10_000, 0.0, 20);
        let r = normal_cloud(10_000, 1.0, 21);
        let base = tv_empirical(&p, &r, &TvOptions::default()).unwrap();
        for s in [0.5, 2.0] {
            let opts = TvOptions {
                bandwidth: Bandwidth::Scaled(s),
                ..TvOptions::default()
            };
            let v = tv_empirical(&p, &r, &opts).unwrap();
            assert!((v.value - base.value).abs() < 3.0 * base.std_error.max(v.std_error), "{s}: {} vs {}", v.value, base.value);
        }
    }

    #[test]
    fn tv_two_dimensional() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let mut a = Vec::new();
        let mut b = Vec::new();
        for _ in 0..2000 {
            a.push(rng.sample::<f64, _>(StandardNormal));
            a.push(rng.sample::<f64, _>(StandardNormal));
            b.push(rng.sample::<f64, _>(StandardNormal) + 50.0);
            b.push(rng.sample::<f64, _>(StandardNormal));
        }
        let p = EmpiricalMeasure::new(2, a).unwrap();
        let q = EmpiricalMeasure::new(2, b).unwrap();
        let opts = TvOptions {
            bootstrap: 2,
            ..TvOptions::default()
        };
        assert!((tv_empirical(&p, &q, &opts).unwrap().value - 2.0).abs() < 1e-3);
    }

    fn brute_force_w1(a: &[f64], b: &[f64]) -> f64 {
        fn permute(k: usize, idx: &mut Vec<usize>, a: &[f64], b: &[f64], best: &mut f64) {
            if k == idx.len() {
                let c: f64 = idx.iter().enumerate().map(|(i, &j)| (a[i] - b[j]).abs()).sum();
                *best = best.min(c);
                return;
            }
            for i in k..idx.len() {
                idx.swap(k, i);
                permute(k + 1, idx, a, b, best);
                idx.swap(k, i);
            }
        }
        let mut best = f64::INFINITY;
        permute(0, &mut (0..a.len()).collect(), a, b, &mut best);
        best / a.len() as f64
    }

    proptest! {
        #[test]
        fn w1_matches_assignment_oracle(
            pts in (1usize..=8).prop_flat_map(|n| (
                prop::collection::vec(-10.0f64..10.0, n),
                prop::collection::vec(-10.0f64..10.0, n),
            ))
        ) {
            let (a, b) = pts;
            let v = w1_1d(&cloud(&a), &cloud(&b)).unwrap();
            prop_assert!((v - brute_force_w1(&a, &b)).abs() < 1e-9);
            let merged = w1_weighted(&sorted_with_weights(&cloud(&a)), &sorted_with_weights(&cloud(&b)));
            prop_assert!((v - merged).abs() < 1e-9);
            prop_assert!((v - w1_1d(&cloud(&b), &cloud(&a)).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn gaussian_tv_is_symmetric_and_bounded(
            m1 in -5.0f64..5.0, m2 in -5.0f64..5.0, s1 in 0.1f64..5.0, s2 in 0.1f64..5.0
        ) {
            let ab = tv_gaussian_1d(m1, s1, m2, s2).unwrap();
            let ba = tv_gaussian_1d(m2, s2, m1, s1).unwrap();
            prop_assert!((ab - ba).abs() < 1e-10);
            prop_assert!((0.0..=2.0).contains(&ab));
        }
    }
}
