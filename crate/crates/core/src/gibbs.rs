//! The Gibbs measures `ν_a ∝ exp(−2(V − V*)/a²)` and their limit `ν*`.
//!
//! Total variation here uses the factor-2 convention
//! `d_TV(μ, ν) = ∫|μ − ν|`, so values lie in `[0, 2]`.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::metrics::EmpiricalMeasure;
use crate::problem::Potential;
use crate::quadrature::{integrate_box, integrate_with_breaks, QuadOptions};

const MIN_ACCEPTANCE: f64 = 1e-4;
const BREAK_MULTIPLES: [f64; 9] = [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0];

/// Controls the integration domain and accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsOptions {
    /// Relative tolerance of the partition constant, also used for the
    /// tail check between successive box doublings.
    pub tol: f64,
    /// Box half-width is `max(width_factor · a, min_half_width)`.
    pub width_factor: f64,
    pub min_half_width: f64,
    pub max_doublings: u32,
}

impl Default for GibbsOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            width_factor: 10.0,
            min_half_width: 5.0,
            max_doublings: 3,
        }
    }
}

/// An axis-aligned box `lo × hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DomainBox {
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Union of cubes of the given half-width centred at each point.
    pub fn around(points: &[Vec<f64>], half_width: f64) -> Self {
        let d = points[0].len();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for p in points {
            for j in 0..d {
                lo[j] = lo[j].min(p[j] - half_width);
                hi[j] = hi[j].max(p[j] + half_width);
            }
        }
        Self { lo, hi }
    }
}

#[derive(Debug, Clone)]
struct Normalization {
    z: f64,
    domain: DomainBox,
}

/// `ν_a` for a fixed potential and level, with a lazily computed and
/// memoized normalizing constant.
#[derive(Debug, Clone)]
pub struct GibbsMeasure {
    pot: Potential,
    a: f64,
    opts: GibbsOptions,
    norm: OnceLock<Normalization>,
}

impl GibbsMeasure {
    pub fn new(pot: Potential, a: f64) -> Result<Self> {
        Self::with_options(pot, a, GibbsOptions::default())
    }

    pub fn with_options(pot: Potential, a: f64, opts: GibbsOptions) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::arg(format!("Gibbs level must be positive and finite, got {a}")));
        }
        check_dim(pot.dim())?;
        if !(opts.tol > 0.0) {
            return Err(Error::arg("Gibbs tolerance must be positive"));
        }
        Ok(Self {
            pot,
            a,
            opts,
            norm: OnceLock::new(),
        })
    }

    pub fn potential(&self) -> &Potential {
        &self.pot
    }

    pub fn level(&self) -> f64 {
        self.a
    }

    pub fn dim(&self) -> usize {
        self.pot.dim()
    }

    /// `−2(V(x) − V*)/a²`.
    #[inline]
    pub fn log_unnormalized(&self, x: &[f64]) -> f64 {
        -2.0 * (self.pot.value(x) - self.pot.v_star()) / (self.a * self.a)
    }

    fn normalization(&self) -> Result<&Normalization> {
        if let Some(n) = self.norm.get() {
            return Ok(n);
        }
        let n = normalize(&self.pot, self.a, &self.opts)?;
        Ok(self.norm.get_or_init(|| n))
    }

    /// `z_a = (∫ exp(−2(V − V*)/a²))^{-1}`.
    pub fn z(&self) -> Result<f64> {
        Ok(self.normalization()?.z)
    }

    /// The box on which the partition constant was computed.
    pub fn domain_box(&self) -> Result<&DomainBox> {
        Ok(&self.normalization()?.domain)
    }

    pub fn density(&self, x: &[f64]) -> Result<f64> {
        Ok(self.z()? * self.log_unnormalized(x).exp())
    }

    /// Smallest box outside of which the density stays below
    /// `rel_threshold` times its maximum, found on a scan grid over the
    /// integration domain and padded by one grid cell.
    pub fn support_box(&self, rel_threshold: f64) -> Result<DomainBox> {
        let dom = self.domain_box()?.clone();
        let d = dom.dim();
        let per_axis: usize = match d {
            1 => 8192,
            2 => 512,
            _ => 96,
        };
        let log_thr = rel_threshold.max(f64::MIN_POSITIVE).ln();
        let step: Vec<f64> = (0..d).map(|j| (dom.hi[j] - dom.lo[j]) / (per_axis - 1) as f64).collect();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        let mut idx = vec![0usize; d];
        let mut x = vec![0.0; d];
        let total = per_axis.pow(d as u32);
        for flat in 0..total {
            let mut r = flat;
            for j in 0..d {
                idx[j] = r % per_axis;
                r /= per_axis;
                x[j] = dom.lo[j] + step[j] * idx[j] as f64;
            }
            // log density relative to the peak value 1 at the minimizers
            if self.log_unnormalized(&x) >= log_thr {
                for j in 0..d {
                    lo[j] = lo[j].min(x[j] - step[j]);
                    hi[j] = hi[j].max(x[j] + step[j]);
                }
            }
        }
        for j in 0..d {
            lo[j] = lo[j].max(dom.lo[j]);
            hi[j] = hi[j].min(dom.hi[j]);
        }
        Ok(DomainBox { lo, hi })
    }

    /// `ν_a` mass of the closed Euclidean ball `B(center, radius)`.
    pub fn ball_mass(&self, center: &[f64], radius: f64) -> Result<f64> {
        if center.len() != self.dim() || !(radius > 0.0) {
            return Err(Error::arg("ball needs a matching centre and a positive radius"));
        }
        let z = self.z()?;
        let scales = axis_scales(&self.pot, self.a);
        let opts = QuadOptions::with_tol(1e-300, 1e-11);
        let mut point = center.to_vec();
        let mass = ball_integral(
            &|x: &[f64]| self.log_unnormalized(x).exp(),
            center,
            radius * radius,
            0,
            &mut point,
            &self.pot,
            &scales,
            &opts,
        )?;
        Ok(z * mass)
    }

    /// `∫ |x − y| ν_a(dx)`.
    pub fn first_moment(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.dim() {
            return Err(Error::arg("point dimension does not match the measure"));
        }
        let z = self.z()?;
        let dom = self.domain_box()?.clone();
        let mut breaks = gibbs_breaks(&self.pot, &[self.a]);
        for (b, yj) in breaks.iter_mut().zip(y) {
            b.push(*yj);
        }
        let r = integrate_box(
            |x: &[f64]| {
                let dist = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                dist * self.log_unnormalized(x).exp()
            },
            &dom.lo,
            &dom.hi,
            &breaks,
            false,
            &QuadOptions::with_tol(1e-300, 1e-10),
        )?;
        Ok(z * r.value)
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > 3 {
        return Err(Error::UnsupportedDimension {
            dim: d,
            hint: "Gibbs quadrature and sampling support dimensions 1 to 3",
        });
    }
    Ok(())
}

/// Per-axis well widths `a / sqrt(2 ∂_jj V(x*))` for every minimizer.
fn axis_scales(pot: &Potential, a: f64) -> Vec<Vec<f64>> {
    let d = pot.dim();
    pot.minimizers()
        .iter()
        .map(|m| {
            let h = pot.hessian(&m.location);
            (0..d)
                .map(|j| {
                    let hjj = h[j * d + j];
                    if hjj > 0.0 {
                        a / (2.0 * hjj).sqrt()
                    } else {
                        a
                    }
                })
                .collect()
        })
        .collect()
}

/// Interior breakpoints at multiples of each well width around each minimizer.
fn gibbs_breaks(pot: &Potential, levels: &[f64]) -> Vec<Vec<f64>> {
    let d = pot.dim();
    let mut breaks = vec![Vec::new(); d];
    for &a in levels {
        for (m, s) in pot.minimizers().iter().zip(axis_scales(pot, a)) {
            for j in 0..d {
                for k in BREAK_MULTIPLES {
                    breaks[j].push(m.location[j] + k * s[j]);
                }
            }
        }
    }
    for b in &mut breaks {
        b.sort_by(f64::total_cmp);
        b.dedup();
    }
    breaks
}

fn base_half_width(a: f64, opts: &GibbsOptions) -> f64 {
    (opts.width_factor * a).max(opts.min_half_width)
}

fn centers(pot: &Potential) -> Vec<Vec<f64>> {
    pot.minimizers().iter().map(|m| m.location.clone()).collect()
}

fn unnormalized_mass(pot: &Potential, a: f64, dom: &DomainBox, breaks: &[Vec<f64>], rel_tol: f64) -> Result<f64> {
    let v_star = pot.v_star();
    let inv = 2.0 / (a * a);
    let r = integrate_box(
        |x: &[f64]| (-(pot.value(x) - v_star) * inv).exp(),
        &dom.lo,
        &dom.hi,
        breaks,
        false,
        &QuadOptions::with_tol(1e-300, rel_tol),
    )?;
    if !(r.value > 0.0) || !r.value.is_finite() {
        return Err(Error::Quadrature(format!("Gibbs mass is not a positive number: {}", r.value)));
    }
    Ok(r.value)
}

fn normalize(pot: &Potential, a: f64, opts: &GibbsOptions) -> Result<Normalization> {
    check_dim(pot.dim())?;
    let c = centers(pot);
    let breaks = gibbs_breaks(pot, &[a]);
    let rel = (opts.tol * 1e-2).max(1e-13);
    let mut w = base_half_width(a, opts);
    let mut dom = DomainBox::around(&c, w);
    let mut mass = unnormalized_mass(pot, a, &dom, &breaks, rel)?;
    for _ in 0..opts.max_doublings {
        w *= 2.0;
        let wider = DomainBox::around(&c, w);
        let wider_mass = unnormalized_mass(pot, a, &wider, &breaks, rel)?;
        let converged = (wider_mass - mass).abs() <= opts.tol * wider_mass;
        mass = wider_mass;
        if converged {
            return Ok(Normalization { z: 1.0 / mass, domain: wider });
        }
        dom = wider;
    }
    Err(Error::Quadrature(format!(
        "Gibbs tail does not vanish on boxes up to half-width {w} around the minimizers \
         (last box {dom:?}); exp(-2V/a^2) is not integrable enough for a = {a}"
    )))
}

/// `z_a` computed with the given options.
pub fn partition_constant(pot: &Potential, a: f64, opts: &GibbsOptions) -> Result<f64> {
    GibbsMeasure::with_options(pot.clone(), a, *opts)?.z()
}

/// Recursion over axes: the ball section along axis `k` is an interval whose
/// half-length depends on the coordinates already fixed.
#[allow(clippy::too_many_arguments)]
fn ball_integral(
    f: &dyn Fn(&[f64]) -> f64,
    center: &[f64],
    r2_left: f64,
    axis: usize,
    point: &mut Vec<f64>,
    pot: &Potential,
    scales: &[Vec<f64>],
    opts: &QuadOptions,
) -> Result<f64> {
    let d = center.len();
    let half = r2_left.max(0.0).sqrt();
    let lo = center[axis] - half;
    let hi = center[axis] + half;
    if half == 0.0 {
        return Ok(0.0);
    }
    let mut b = vec![lo];
    for (m, s) in pot.minimizers().iter().zip(scales) {
        for k in BREAK_MULTIPLES {
            let x = m.location[axis] + k * s[axis];
            if x > lo && x < hi {
                b.push(x);
            }
        }
    }
    b.push(hi);
    b.sort_by(f64::total_cmp);
    b.dedup();
    let mut err = None;
    let r = integrate_with_breaks(
        |x| {
            point[axis] = x;
            if axis + 1 == d {
                return f(point);
            }
            let rest = r2_left - (x - center[axis]) * (x - center[axis]);
            let mut inner = point.clone();
            match ball_integral(f, center, rest, axis + 1, &mut inner, pot, scales, opts) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        },
        &b,
        opts,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(r.value),
    }
}

/// Weighted Dirac mixture on the minimizers.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitMeasure {
    pub atoms: Vec<(Vec<f64>, f64)>,
}

/// `ν*`: atoms at the declared minimizers with weights `∝ det(∇²V)^{-1/2}`.
pub fn limit_measure(pot: &Potential) -> Result<LimitMeasure> {
    let mins = pot.minimizers();
    if mins.is_empty() {
        return Err(Error::arg("potential has no minimizers"));
    }
    let raw: Vec<f64> = mins.iter().map(|m| m.hessian_det.powf(-0.5)).collect();
    let total: f64 = raw.iter().sum();
    Ok(LimitMeasure {
        atoms: mins.iter().zip(raw).map(|(m, w)| (m.location.clone(), w / total)).collect(),
    })
}

/// `∫ |ν_{a1} − ν_{a2}|` by adaptive quadrature on the wider of the two
/// integration boxes.
pub fn tv_gibbs_pair(pot: &Potential, a1: f64, a2: f64, opts: &GibbsOptions) -> Result<f64> {
    let g1 = GibbsMeasure::with_options(pot.clone(), a1, *opts)?;
    let g2 = GibbsMeasure::with_options(pot.clone(), a2, *opts)?;
    tv_between(&g1, &g2)
}

/// `∫ |ν − μ|` for two Gibbs measures on the same potential.
pub fn tv_between(g1: &GibbsMeasure, g2: &GibbsMeasure) -> Result<f64> {
    let pot = g1.potential();
    if g2.dim() != pot.dim() {
        return Err(Error::arg("Gibbs measures live in different dimensions"));
    }
    if g1.level() == g2.level() {
        return Ok(0.0);
    }
    let (z1, z2) = (g1.z()?, g2.z()?);
    let (b1, b2) = (g1.domain_box()?, g2.domain_box()?);
    let lo: Vec<f64> = b1.lo.iter().zip(&b2.lo).map(|(a, b)| a.min(*b)).collect();
    let hi: Vec<f64> = b1.hi.iter().zip(&b2.hi).map(|(a, b)| a.max(*b)).collect();
    let breaks = gibbs_breaks(pot, &[g1.level(), g2.level()]);
    let r = integrate_box(
        |x: &[f64]| z1 * g1.log_unnormalized(x).exp() - z2 * g2.log_unnormalized(x).exp(),
        &lo,
        &hi,
        &breaks,
        true,
        &QuadOptions::with_tol(1e-14, 1e-9),
    )?;
    Ok(r.value.clamp(0.0, 2.0))
}

/// Exact draws from `ν_a` with the observed acceptance rate of the
/// rejection step (1 when the grid-inversion sampler was used).
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsSample {
    pub samples: EmpiricalMeasure,
    pub acceptance_rate: f64,
    pub used_grid_inversion: bool,
}

const DEFENSIVE_WEIGHT: f64 = 0.1;

struct Component {
    mean: Vec<f64>,
    /// Upper Cholesky factor `Lᵀ` of the Hessian at the minimizer.
    chol_t: DMatrix<f64>,
    hess: Vec<f64>,
    log_weight: f64,
    log_norm: f64,
}

/// Gaussian mixture with covariances `a²(∇²V(x_i*))^{-1}` (twice the
/// local Laplace covariance) and weights `∝ det^{-1/2}`, plus a broad
/// component over the integration box that covers barriers and tails.
struct Proposal {
    comps: Vec<Component>,
    d: usize,
    a: f64,
}

impl Proposal {
    fn new(g: &GibbsMeasure) -> Result<Self> {
        let pot = g.potential();
        let a = g.level();
        let d = pot.dim();
        let lm = limit_measure(pot)?;
        let mut comps = Vec::new();
        for (m, (_, w)) in pot.minimizers().iter().zip(&lm.atoms) {
            let hess = pot.hessian(&m.location);
            let h = DMatrix::from_row_slice(d, d, &hess);
            let chol = h.clone().cholesky().ok_or_else(|| {
                Error::Evaluation(format!("hessian at {:?} is not positive definite", m.location))
            })?;
            let l = chol.l();
            let log_det_h: f64 = (0..d).map(|i| 2.0 * l[(i, i)].ln()).sum();
            // log N(x; m, a² H⁻¹) = −q/2 − (d/2) log(2π a²) + ½ log det H
            let log_norm = -0.5 * d as f64 * (2.0 * std::f64::consts::PI * a * a).ln() + 0.5 * log_det_h;
            comps.push(Component {
                mean: m.location.clone(),
                chol_t: l.transpose(),
                hess,
                log_weight: (w * (1.0 - DEFENSIVE_WEIGHT)).ln(),
                log_norm,
            });
        }
        let dom = g.domain_box()?;
        let mut hess = vec![0.0; d * d];
        let mut chol_t = DMatrix::zeros(d, d);
        let mut log_det_h = 0.0;
        for j in 0..d {
            let sd = 0.25 * (dom.hi[j] - dom.lo[j]);
            let h = (a / sd).powi(2);
            hess[j * d + j] = h;
            chol_t[(j, j)] = h.sqrt();
            log_det_h += h.ln();
        }
        comps.push(Component {
            mean: (0..d).map(|j| 0.5 * (dom.lo[j] + dom.hi[j])).collect(),
            chol_t,
            hess,
            log_weight: DEFENSIVE_WEIGHT.ln(),
            log_norm: -0.5 * d as f64 * (2.0 * std::f64::consts::PI * a * a).ln() + 0.5 * log_det_h,
        });
        Ok(Self { comps, d, a })
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let d = self.d;
        let mut terms = Vec::with_capacity(self.comps.len());
        for c in &self.comps {
            let mut q = 0.0;
            for i in 0..d {
                for j in 0..d {
                    q += (x[i] - c.mean[i]) * c.hess[i * d + j] * (x[j] - c.mean[j]);
                }
            }
            terms.push(c.log_weight + c.log_norm - 0.5 * q / (self.a * self.a));
        }
        log_sum_exp(&terms)
    }

    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = self.comps.len() - 1;
        for (i, c) in self.comps.iter().enumerate() {
            acc += c.log_weight.exp();
            if u < acc {
                pick = i;
                break;
            }
        }
        let c = &self.comps[pick];
        let g = DVector::from_iterator(self.d, (0..self.d).map(|_| rng.sample::<f64, _>(StandardNormal)));
        // x = m + a L⁻ᵀ g has covariance a² H⁻¹
        let y = c
            .chol_t
            .solve_upper_triangular(&g)
            .expect("cholesky factor has a positive diagonal");
        for i in 0..self.d {
            out[i] = c.mean[i] + self.a * y[i];
        }
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// `log sup (target / proposal)` on a grid over the integration box,
/// with 10% headroom.
fn log_envelope(g: &GibbsMeasure, prop: &Proposal) -> Result<f64> {
    let dom = g.domain_box()?.clone();
    let d = dom.dim();
    let per_axis: usize = match d {
        1 => 20001,
        2 => 401,
        _ => 81,
    };
    let mut best = f64::NEG_INFINITY;
    let mut x = vec![0.0; d];
    for flat in 0..per_axis.pow(d as u32) {
        let mut r = flat;
        for j in 0..d {
            let k = r % per_axis;
            r /= per_axis;
            x[j] = dom.lo[j] + (dom.hi[j] - dom.lo[j]) * k as f64 / (per_axis - 1) as f64;
        }
        let lt = g.log_unnormalized(&x);
        if lt < -700.0 {
            continue;
        }
        best = best.max(lt - prop.log_density(&x));
    }
    Ok(best + 1.1f64.ln())
}

/// `n` exact samples from `ν_a`: rejection from the Gaussian-mixture
/// proposal, falling back to grid inversion in one dimension when the
/// acceptance rate drops below 1e-4.
pub fn sample_gibbs(pot: &Potential, a: f64, n: usize, seed: u64) -> Result<GibbsSample> {
    let g = GibbsMeasure::new(pot.clone(), a)?;
    sample_from(&g, n, seed)
}

pub fn sample_from(g: &GibbsMeasure, n: usize, seed: u64) -> Result<GibbsSample> {
    if n == 0 {
        return Err(Error::arg("need at least one sample"));
    }
    let d = g.dim();
    let prop = Proposal::new(g)?;
    let log_m = log_envelope(g, &prop)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n * d);
    let mut x = vec![0.0; d];
    let mut proposed: u64 = 0;
    let mut accepted = 0usize;
    while accepted < n {
        prop.sample(&mut rng, &mut x);
        proposed += 1;
        let log_ratio = g.log_unnormalized(&x) - prop.log_density(&x) - log_m;
        let u: f64 = rng.random();
        if u.ln() < log_ratio {
            out.extend_from_slice(&x);
            accepted += 1;
        }
        if proposed >= 100_000 && (accepted as f64) < MIN_ACCEPTANCE * proposed as f64 {
            let rate = accepted as f64 / proposed as f64;
            if d == 1 {
                return grid_inversion(g, n, &mut rng);
            }
            return Err(Error::LowAcceptance { rate });
        }
    }
    Ok(GibbsSample {
        samples: EmpiricalMeasure::new(d, out)?,
        acceptance_rate: accepted as f64 / proposed as f64,
        used_grid_inversion: false,
    })
}

fn grid_inversion(g: &GibbsMeasure, n: usize, rng: &mut ChaCha8Rng) -> Result<GibbsSample> {
    let sb = g.support_box(1e-14)?;
    let (lo, hi) = (sb.lo[0], sb.hi[0]);
    let m = 1 << 16;
    let h = (hi - lo) / m as f64;
    let dens: Vec<f64> = (0..=m).map(|k| g.log_unnormalized(&[lo + h * k as f64]).exp()).collect();
    let mut cdf = vec![0.0; m + 1];
    for k in 1..=m {
        cdf[k] = cdf[k - 1] + 0.5 * h * (dens[k - 1] + dens[k]);
    }
    let total = cdf[m];
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random::<f64>() * total;
        let k = cdf.partition_point(|&c| c < u).clamp(1, m);
        let span = cdf[k] - cdf[k - 1];
        let frac = if span > 0.0 { (u - cdf[k - 1]) / span } else { 0.5 };
        out.push(lo + h * ((k - 1) as f64 + frac));
    }
    Ok(GibbsSample {
        samples: EmpiricalMeasure::new(1, out)?,
        acceptance_rate: 1.0,
        used_grid_inversion: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::tv_gaussian_1d;
    use crate::problem::builtin_double_well;
    use std::f64::consts::PI;

    fn quad() -> Potential {
        Potential::quadratic(1, 1.0).unwrap()
    }

    #[test]
    fn gaussian_partition_constants() {
        // ∫ exp(−x²/a²) dx = a√π
        for a in [0.25, 0.5, 1.0] {
            let z = partition_constant(&quad(), a, &GibbsOptions::default()).unwrap();
            assert!((z - 1.0 / (a * PI.sqrt())).abs() < 1e-9, "a = {a}: {z}");
        }
        let z = partition_constant(&quad(), 0.5, &GibbsOptions::default()).unwrap();
        assert!((z - (4.0 / PI).sqrt()).abs() < 1e-6);
        let q2 = Potential::quadratic(2, 2.0).unwrap();
        // ∫ exp(−2|x|²/a²) = π a² / 2 in 2D
        let z2 = partition_constant(&q2, 0.7, &GibbsOptions::default()).unwrap();
        assert!((z2 * PI * 0.49 / 2.0 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn box_doubling_is_stable() {
        let g = GibbsMeasure::new(quad(), 1.0).unwrap();
        let wide = GibbsOptions {
            min_half_width: 40.0,
            ..GibbsOptions::default()
        };
        let g2 = GibbsMeasure::with_options(quad(), 1.0, wide).unwrap();
        assert!((g.z().unwrap() - g2.z().unwrap()).abs() < 1e-9);
    }

    #[test]
    fn limit_weights() {
        let sym = builtin_double_well(1, 1.0, 2.0, 2.0).unwrap();
        let w: Vec<f64> = limit_measure(&sym).unwrap().atoms.iter().map(|a| a.1).collect();
        assert!((w[0] - 0.5).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12);
        let asym = builtin_double_well(1, 1.0, 1.0, 4.0).unwrap();
        let w: Vec<f64> = limit_measure(&asym).unwrap().atoms.iter().map(|a| a.1).collect();
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-12 && (w[1] - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(limit_measure(&quad()).unwrap().atoms[0].1, 1.0);
    }

    #[test]
    fn well_masses_approach_limit_weights() {
        let asym = builtin_double_well(1, 1.0, 1.0, 4.0).unwrap();
        let g = GibbsMeasure::new(asym.clone(), 0.15).unwrap();
        let left = g.ball_mass(&[-1.0], 0.3).unwrap();
        let right = g.ball_mass(&[1.0], 0.3).unwrap();
        assert!((left - 2.0 / 3.0).abs() < 0.02, "{left}");
        assert!((right - 1.0 / 3.0).abs() < 0.02, "{right}");
        // whole wells at a = 0.2
        let g = GibbsMeasure::new(asym, 0.2).unwrap();
        let left = g.ball_mass(&[-1.0], 1.0).unwrap();
        assert!((left - 2.0 / 3.0).abs() < 0.02, "{left}");
    }

    #[test]
    fn ball_mass_in_two_dimensions() {
        // ν_a for V = 1 + |x|²/2 is N(0, a²/2 I); P(|X| ≤ r) = 1 − exp(−r²/a²)
        let g = GibbsMeasure::new(Potential::quadratic(2, 1.0).unwrap(), 1.0).unwrap();
        let m = g.ball_mass(&[0.0, 0.0], 1.0).unwrap();
        assert!((m - (1.0 - (-1.0f64).exp())).abs() < 1e-8, "{m}");
    }

    #[test]
    fn first_moment_of_gaussian() {
        // E|X| for X ~ N(0, s²) is s√(2/π)
        let g = GibbsMeasure::new(quad(), 1.0).unwrap();
        let s = (0.5f64).sqrt();
        assert!((g.first_moment(&[0.0]).unwrap() - s * (2.0 / PI).sqrt()).abs() < 1e-8);
    }

    #[test]
    fn gibbs_pair_tv() {
        let opts = GibbsOptions::default();
        assert!(tv_gibbs_pair(&quad(), 0.7, 0.7, &opts).unwrap().abs() < 1e-8);
        let q = tv_gibbs_pair(&quad(), 1.0, 0.5, &opts).unwrap();
        let exact = tv_gaussian_1d(0.0, 0.5f64.sqrt(), 0.0, 0.125f64.sqrt()).unwrap();
        assert!((q - exact).abs() < 1e-4, "{q} vs {exact}");
        let dw = builtin_double_well(1, 1.0, 1.0, 4.0).unwrap();
        let (x, y, z) = (0.3, 0.45, 0.8);
        let xy = tv_gibbs_pair(&dw, x, y, &opts).unwrap();
        let yx = tv_gibbs_pair(&dw, y, x, &opts).unwrap();
        let yz = tv_gibbs_pair(&dw, y, z, &opts).unwrap();
        let xz = tv_gibbs_pair(&dw, x, z, &opts).unwrap();
        assert!((xy - yx).abs() < 1e-8);
        assert!(xz <= xy + yz + 1e-8);
    }

    #[test]
    fn rejection_sampler_matches_gaussian() {
        let s = sample_gibbs(&quad(), 1.0, 100_000, 1).unwrap();
        assert!(s.acceptance_rate > 0.3 && !s.used_grid_inversion);
        let xs = s.samples.marginal(0);
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        // standard error of the sample variance of N(0, 1/2) is (1/2)√(2/n)
        assert!((var - 0.5).abs() < 3.0 * 0.5 * (2.0 / n).sqrt(), "{var}");
        let again = sample_gibbs(&quad(), 1.0, 1000, 1).unwrap();
        let twice = sample_gibbs(&quad(), 1.0, 1000, 1).unwrap();
        assert_eq!(again, twice);
    }

    #[test]
    fn symmetric_double_well_sampler_is_balanced() {
        let sym = builtin_double_well(1, 1.0, 2.0, 2.0).unwrap();
        let s = sample_gibbs(&sym, 0.5, 100_000, 4).unwrap();
        let right = s.samples.marginal(0).iter().filter(|x| **x > 0.0).count() as f64 / 1e5;
        assert!((right - 0.5).abs() < 0.01, "{right}");
    }

    #[test]
    fn grid_inversion_matches_gaussian() {
        let g = GibbsMeasure::new(quad(), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = grid_inversion(&g, 50_000, &mut rng).unwrap();
        let xs = s.samples.marginal(0);
        let var = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        assert!((var - 0.5).abs() < 0.02);
    }

    #[test]
    fn invalid_inputs() {
        assert!(GibbsMeasure::new(quad(), 0.0).is_err());
        assert!(matches!(
            GibbsMeasure::new(Potential::quadratic(4, 1.0).unwrap(), 1.0),
            Err(Error::UnsupportedDimension { .. })
        ));
        assert!(sample_gibbs(&quad(), 1.0, 0, 0).is_err());
    }
}
