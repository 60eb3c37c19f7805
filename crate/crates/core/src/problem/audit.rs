//! Grid-based certificates for the standing assumptions on `V` and `σ`.
//!
//! These are sampled checks, not proofs: every entry reports the worst case
//! over the supplied points together with the empirically tightest constant.

use std::fmt;

use nalgebra::DMatrix;

use super::{norm, DiffusionField, Potential};
use crate::error::{Error, Result};

const PRIMES: [u32; 6] = [2, 3, 5, 7, 11, 13];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut acc = 0.0;
    while i > 0 {
        acc += (i % base as u64) as f64 * inv;
        i /= base as u64;
        inv /= b;
    }
    acc
}

/// Audit points and point pairs.
#[derive(Debug, Clone)]
pub struct AuditGrid {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub pairs: Vec<(Vec<f64>, Vec<f64>)>,
    pub description: String,
}

impl AuditGrid {
    /// `n_points` Halton points in `[−half_width, half_width]^d` and up to
    /// `n_pairs` Halton pairs with both members outside `B(0, r0)`.
    /// Dimensions up to 3 are supported.
    pub fn halton(dim: usize, half_width: f64, n_points: usize, n_pairs: usize, r0: f64) -> Result<Self> {
        if dim == 0 || dim > 3 {
            return Err(Error::UnsupportedDimension {
                dim,
                hint: "audit grids cover dimensions 1 to 3",
            });
        }
        let map = |u: f64| -half_width + 2.0 * half_width * u;
        let points = if dim == 1 {
            (0..n_points)
                .map(|k| vec![map((k as f64 + 0.5) / n_points as f64)])
                .collect()
        } else {
            (1..=n_points as u64)
                .map(|k| (0..dim).map(|j| map(radical_inverse(k, PRIMES[j]))).collect())
                .collect()
        };
        let mut pairs = Vec::with_capacity(n_pairs);
        let mut k = 1u64;
        while pairs.len() < n_pairs && k <= 50 * n_pairs as u64 {
            let x: Vec<f64> = (0..dim).map(|j| map(radical_inverse(k, PRIMES[j]))).collect();
            let y: Vec<f64> = (0..dim).map(|j| map(radical_inverse(k, PRIMES[dim + j]))).collect();
            if norm(&x) >= r0 && norm(&y) >= r0 {
                pairs.push((x, y));
            }
            k += 1;
        }
        Ok(Self {
            dim,
            points,
            pairs,
            description: format!("halton {n_points} pts / {n_pairs} pairs in [-{half_width},{half_width}]^{dim}, R0={r0}"),
        })
    }

    /// 10⁴ points in `[−10, 10]^d` and 10⁴ pairs outside `B(0, r0)`.
    pub fn default_for(dim: usize, r0: f64) -> Result<Self> {
        AuditGrid::halton(dim, 10.0, 10_000, 10_000, r0)
    }

    /// Explicit points and pairs.
    pub fn from_points(dim: usize, points: Vec<Vec<f64>>, pairs: Vec<(Vec<f64>, Vec<f64>)>) -> Self {
        let description = format!("{} explicit pts / {} explicit pairs", points.len(), pairs.len());
        Self {
            dim,
            points,
            pairs,
            description,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AuditParams {
    /// Radius outside of which dissipativity is checked.
    pub r0: f64,
    /// Dissipativity constant `α0`.
    pub alpha0: f64,
    /// Claimed constant `C` in `|∇V|² <= C·V`. `None` reports the tightest
    /// constant with zero margin.
    pub growth_bound: Option<f64>,
    /// Claimed bound on `‖∇²V‖`.
    pub hessian_bound: Option<f64>,
}

impl AuditParams {
    pub fn new(r0: f64, alpha0: f64) -> Self {
        Self {
            r0,
            alpha0,
            growth_bound: None,
            hessian_bound: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionEntry {
    pub name: &'static str,
    pub audited: bool,
    pub grid: String,
    /// Worst-case margin; `pass` iff it is `>= 0`.
    pub margin: f64,
    /// Empirically tightest constant, where one applies.
    pub estimate: Option<f64>,
    pub pass: bool,
}

impl AssumptionEntry {
    fn new(name: &'static str, grid: &str, margin: f64, estimate: Option<f64>) -> Self {
        Self {
            name,
            audited: true,
            grid: grid.to_string(),
            margin,
            estimate,
            pass: margin >= 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub entries: Vec<AssumptionEntry>,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| !e.audited || e.pass)
    }

    pub fn get(&self, name: &str) -> Option<&AssumptionEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

impl fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<16} {:>6} {:>14} {:>14}  grid", "assumption", "pass", "margin", "estimate")?;
        for e in &self.entries {
            let est = e.estimate.map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"));
            writeln!(
                f,
                "{:<16} {:>6} {:>14.6e} {:>14}  {}",
                e.name,
                if !e.audited { "skip" } else if e.pass { "yes" } else { "NO" },
                e.margin,
                est,
                e.grid
            )?;
        }
        Ok(())
    }
}

fn sym_eigen_extremes(m: &[f64], d: usize) -> (f64, f64) {
    let eig = DMatrix::from_row_slice(d, d, m).symmetric_eigen().eigenvalues;
    (eig.min(), eig.max())
}

/// Audits positivity and the declared minimizers, gradient growth
/// `|∇V|² <= C·V`, bounded Hessian, uniform ellipticity, the bound on `‖σ‖`
/// and dissipativity outside `B(0, r0)`:
/// `⟨σσᵀ∇V(x) − σσᵀ∇V(y), x − y⟩ >= α0 |x − y|²`.
pub fn audit_assumptions(
    pot: &Potential,
    sigma: &DiffusionField,
    grid: &AuditGrid,
    params: &AuditParams,
) -> Result<AssumptionReport> {
    let d = pot.dim();
    if sigma.dim() != d || grid.dim != d {
        return Err(Error::arg("potential, sigma and grid dimensions differ"));
    }
    if grid.points.is_empty() {
        return Err(Error::arg("audit grid is empty"));
    }
    let pairs: Vec<_> = grid
        .pairs
        .iter()
        .filter(|(x, y)| norm(x) >= params.r0 && norm(y) >= params.r0)
        .collect();
    if pairs.is_empty() {
        return Err(Error::arg("no audit pairs lie outside B(0, R0)"));
    }
    let desc = grid.description.as_str();

    let mut min_v = f64::INFINITY;
    let mut growth = 0.0f64;
    let mut hess_norm = 0.0f64;
    let mut ellip = f64::INFINITY;
    let mut sig_norm = 0.0f64;
    for x in &grid.points {
        let v = pot.value(x);
        let g = pot.gradient(x);
        if !v.is_finite() || g.iter().any(|c| !c.is_finite()) {
            return Err(Error::Evaluation(format!("potential is not finite at {x:?}")));
        }
        min_v = min_v.min(v);
        if v > 0.0 {
            growth = growth.max(g.iter().map(|c| c * c).sum::<f64>() / v);
        }
        let (lo, hi) = sym_eigen_extremes(&pot.hessian(x), d);
        hess_norm = hess_norm.max(lo.abs().max(hi.abs()));
        let (lo, _) = sym_eigen_extremes(&sigma.covariance(x), d);
        ellip = ellip.min(lo);
        let s = sigma.sigma(x);
        let sv = DMatrix::from_row_slice(d, d, &s).singular_values();
        sig_norm = sig_norm.max(sv.max());
    }

    let mut minimizer_margin = f64::INFINITY;
    for m in pot.minimizers() {
        let dv = (pot.value(&m.location) - pot.v_star()).abs();
        let dg = norm(&pot.gradient(&m.location));
        minimizer_margin = minimizer_margin.min(1e-10 - dv).min(1e-8 - dg).min(m.hessian_det);
    }

    let weighted_grad = |x: &[f64]| -> Vec<f64> {
        let c = sigma.covariance(x);
        let g = pot.gradient(x);
        (0..d).map(|i| (0..d).map(|j| c[i * d + j] * g[j]).sum()).collect()
    };
    let mut cf_margin = f64::INFINITY;
    let mut cf_alpha = f64::INFINITY;
    for (x, y) in &pairs {
        let gx = weighted_grad(x);
        let gy = weighted_grad(y);
        let mut inner = 0.0;
        let mut dist2 = 0.0;
        for i in 0..d {
            let dx = x[i] - y[i];
            inner += (gx[i] - gy[i]) * dx;
            dist2 += dx * dx;
        }
        cf_margin = cf_margin.min(inner - params.alpha0 * dist2);
        if dist2 > 0.0 {
            cf_alpha = cf_alpha.min(inner / dist2);
        }
    }

    let pairs_desc = format!("{desc}; {} pairs outside B(0,{})", pairs.len(), params.r0);
    let entries = vec![
        AssumptionEntry::new("positivity", desc, min_v, Some(min_v)),
        AssumptionEntry::new("minimizers", "declared minimizers", minimizer_margin, None),
        AssumptionEntry::new(
            "gradient_growth",
            desc,
            params.growth_bound.map_or(0.0, |c| c - growth),
            Some(growth),
        ),
        AssumptionEntry::new(
            "hessian_bound",
            desc,
            params.hessian_bound.map_or(0.0, |c| c - hess_norm),
            Some(hess_norm),
        ),
        AssumptionEntry::new(
            "ellipticity",
            desc,
            ellip - sigma.ellipticity_lb().powi(2),
            Some(ellip.max(0.0).sqrt()),
        ),
        AssumptionEntry::new("sigma_bound", desc, sigma.sup_norm_ub() - sig_norm, Some(sig_norm)),
        AssumptionEntry::new("dissipativity", &pairs_desc, cf_margin, Some(cf_alpha)),
    ];
    Ok(AssumptionReport { entries })
}
