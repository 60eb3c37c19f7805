//! Potentials `V`, diffusion fields `σ`, the annealed drift and numeric audits
//! of the standing assumptions.

mod audit;
mod builtins;
mod drift;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub use audit::{audit_assumptions, AssumptionEntry, AssumptionReport, AuditGrid, AuditParams};
pub use builtins::{builtin_double_well, ConstantSigma, DoubleWell, Quadratic, SinDiagonal};
pub use drift::{correction_term, drift, drift_weighted, fd_correction, CorrectionWeight, DEFAULT_FD_STEP};
pub(crate) use drift::combine_drift;

/// A smooth objective `V : R^d -> (0, inf)`.
pub trait Objective: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], out: &mut [f64]);
    /// Writes the gradient and returns the value.
    fn value_and_gradient(&self, x: &[f64], out: &mut [f64]) -> f64 {
        self.gradient(x, out);
        self.value(x)
    }
    /// Writes the row-major Hessian into `out`. Returns `false` when no
    /// closed form exists, in which case callers fall back to differences.
    fn hessian(&self, _x: &[f64], _out: &mut [f64]) -> bool {
        false
    }
}

/// A matrix field `x -> σ(x)` of size `d × d`, row-major.
pub trait DiffusionMatrix: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn sigma(&self, x: &[f64], out: &mut [f64]);
    /// Closed form of `Υ_i = Σ_j ∂_j (σσᵀ)_ij`. Returns `false` if absent.
    fn correction(&self, _x: &[f64], _out: &mut [f64]) -> bool {
        false
    }
    fn is_constant(&self) -> bool {
        false
    }
}

/// A declared global minimizer of a potential.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimizer {
    pub location: Vec<f64>,
    /// `det ∇²V(x*)`, strictly positive.
    pub hessian_det: f64,
}

/// Construction metadata recorded alongside a potential.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PotentialMeta {
    /// Radius beyond which the potential continues with quadratic tails.
    pub splice_radius: Option<f64>,
    /// Radius `R0` outside of which the dissipativity condition is claimed.
    pub dissipative_radius: Option<f64>,
}

#[derive(Clone)]
pub struct Potential {
    name: String,
    objective: Arc<dyn Objective>,
    minimizers: Vec<Minimizer>,
    v_star: f64,
    meta: PotentialMeta,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("v_star", &self.v_star)
            .field("minimizers", &self.minimizers)
            .field("meta", &self.meta)
            .finish()
    }
}

impl Potential {
    /// Wraps an objective with its declared minimizers and minimum value,
    /// verifying the declaration: `V(x*) = v_star` within 1e-10,
    /// `|∇V(x*)| <= 1e-8` and `det ∇²V(x*) > 0`.
    pub fn new(
        name: impl Into<String>,
        objective: Arc<dyn Objective>,
        minimizers: Vec<Minimizer>,
        v_star: f64,
        meta: PotentialMeta,
    ) -> Result<Self> {
        let d = objective.dim();
        if d == 0 {
            return Err(Error::arg("potential dimension must be positive"));
        }
        if !(v_star > 0.0) {
            return Err(Error::arg(format!("minimum value must be positive, got {v_star}")));
        }
        if minimizers.is_empty() {
            return Err(Error::arg("a potential must declare at least one minimizer"));
        }
        let mut grad = vec![0.0; d];
        for m in &minimizers {
            if m.location.len() != d {
                return Err(Error::arg("minimizer dimension does not match the potential"));
            }
            if !(m.hessian_det > 0.0) {
                return Err(Error::arg(format!(
                    "hessian determinant at {:?} must be positive, got {}",
                    m.location, m.hessian_det
                )));
            }
            let v = objective.value(&m.location);
            if (v - v_star).abs() > 1e-10 {
                return Err(Error::arg(format!(
                    "V({:?}) = {v} differs from declared minimum {v_star}",
                    m.location
                )));
            }
            objective.gradient(&m.location, &mut grad);
            if norm(&grad) > 1e-8 {
                return Err(Error::arg(format!("gradient does not vanish at {:?}", m.location)));
            }
        }
        Ok(Self {
            name: name.into(),
            objective,
            minimizers,
            v_star,
            meta,
        })
    }

    /// `V(x) = 1 + (k/2)|x|²`.
    pub fn quadratic(dim: usize, curvature: f64) -> Result<Self> {
        if dim == 0 || !(curvature > 0.0) {
            return Err(Error::arg("quadratic potential needs dim > 0 and curvature > 0"));
        }
        let obj = Quadratic::new(dim, curvature);
        Potential::new(
            "quadratic",
            Arc::new(obj),
            vec![Minimizer {
                location: vec![0.0; dim],
                hessian_det: curvature.powi(dim as i32),
            }],
            1.0,
            PotentialMeta {
                splice_radius: None,
                dissipative_radius: Some(0.0),
            },
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn v_star(&self) -> f64 {
        self.v_star
    }

    pub fn minimizers(&self) -> &[Minimizer] {
        &self.minimizers
    }

    pub fn meta(&self) -> &PotentialMeta {
        &self.meta
    }

    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        self.objective.value(x)
    }

    #[inline]
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        self.objective.gradient(x, out)
    }

    #[inline]
    pub fn value_and_gradient(&self, x: &[f64], out: &mut [f64]) -> f64 {
        self.objective.value_and_gradient(x, out)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.objective.gradient(x, &mut g);
        g
    }

    /// Row-major Hessian: closed form when available, otherwise central
    /// differences of the gradient with step 1e-5.
    pub fn hessian(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut h = vec![0.0; d * d];
        if self.objective.hessian(x, &mut h) {
            return h;
        }
        let step = 1e-5;
        let mut xp = x.to_vec();
        let mut gp = vec![0.0; d];
        let mut gm = vec![0.0; d];
        for j in 0..d {
            xp[j] = x[j] + step;
            self.objective.gradient(&xp, &mut gp);
            xp[j] = x[j] - step;
            self.objective.gradient(&xp, &mut gm);
            xp[j] = x[j];
            for i in 0..d {
                h[i * d + j] = (gp[i] - gm[i]) / (2.0 * step);
            }
        }
        // symmetrize
        for i in 0..d {
            for j in 0..i {
                let s = 0.5 * (h[i * d + j] + h[j * d + i]);
                h[i * d + j] = s;
                h[j * d + i] = s;
            }
        }
        h
    }
}

#[derive(Clone)]
pub struct DiffusionField {
    name: String,
    field: Arc<dyn DiffusionMatrix>,
    ellipticity_lb: f64,
    sup_norm_ub: f64,
}

impl fmt::Debug for DiffusionField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffusionField")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("ellipticity_lb", &self.ellipticity_lb)
            .field("sup_norm_ub", &self.sup_norm_ub)
            .finish()
    }
}

impl DiffusionField {
    pub fn new(
        name: impl Into<String>,
        field: Arc<dyn DiffusionMatrix>,
        ellipticity_lb: f64,
        sup_norm_ub: f64,
    ) -> Result<Self> {
        if field.dim() == 0 {
            return Err(Error::arg("diffusion dimension must be positive"));
        }
        if !(ellipticity_lb > 0.0) || !(sup_norm_ub >= ellipticity_lb) {
            return Err(Error::arg(format!(
                "need 0 < ellipticity_lb <= sup_norm_ub, got {ellipticity_lb} and {sup_norm_ub}"
            )));
        }
        Ok(Self {
            name: name.into(),
            field,
            ellipticity_lb,
            sup_norm_ub,
        })
    }

    /// Constant matrix `σ`, row-major. Bounds are its extreme singular values.
    pub fn constant(dim: usize, matrix: Vec<f64>) -> Result<Self> {
        if matrix.len() != dim * dim || dim == 0 {
            return Err(Error::arg("constant sigma needs a dim × dim matrix"));
        }
        let sv = DMatrix::from_row_slice(dim, dim, &matrix).singular_values();
        let lo = sv.min();
        let hi = sv.max();
        DiffusionField::new("constant", Arc::new(ConstantSigma::new(dim, matrix)), lo, hi)
    }

    /// `σ = c·I`.
    pub fn scalar(dim: usize, c: f64) -> Result<Self> {
        let mut m = vec![0.0; dim * dim];
        for i in 0..dim {
            m[i * dim + i] = c;
        }
        DiffusionField::constant(dim, m)
    }

    /// `σ(x) = diag(s(x_1), ..., s(x_d))` with `s(u) = base + amp·sin(u)`.
    pub fn sin_diagonal(dim: usize, base: f64, amp: f64) -> Result<Self> {
        if dim == 0 || !(base > amp.abs()) {
            return Err(Error::arg("sin-modulated sigma needs base > |amp|"));
        }
        DiffusionField::new(
            "sin_diag",
            Arc::new(SinDiagonal::new(dim, base, amp)),
            base - amp.abs(),
            base + amp.abs(),
        )
    }

    /// Replaces the declared ellipticity lower bound (the audit checks it).
    pub fn with_ellipticity_lb(mut self, lb: f64) -> Self {
        self.ellipticity_lb = lb;
        self
    }

    pub fn with_sup_norm_ub(mut self, ub: f64) -> Self {
        self.sup_norm_ub = ub;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn ellipticity_lb(&self) -> f64 {
        self.ellipticity_lb
    }

    pub fn sup_norm_ub(&self) -> f64 {
        self.sup_norm_ub
    }

    pub fn is_constant(&self) -> bool {
        self.field.is_constant()
    }

    #[inline]
    pub fn sigma_into(&self, x: &[f64], out: &mut [f64]) {
        self.field.sigma(x, out)
    }

    pub fn sigma(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut s = vec![0.0; d * d];
        self.field.sigma(x, &mut s);
        s
    }

    /// Closed-form correction if the field provides one.
    #[inline]
    pub fn closed_correction(&self, x: &[f64], out: &mut [f64]) -> bool {
        self.field.correction(x, out)
    }

    /// `σσᵀ(x)`, row-major.
    pub fn covariance(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let s = self.sigma(x);
        let mut c = vec![0.0; d * d];
        gram(&s, d, &mut c);
        c
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `out = s sᵀ` for a row-major `d × d` matrix `s`.
#[inline]
pub(crate) fn gram(s: &[f64], d: usize, out: &mut [f64]) {
    for i in 0..d {
        for j in 0..=i {
            let mut acc = 0.0;
            for k in 0..d {
                acc += s[i * d + k] * s[j * d + k];
            }
            out[i * d + j] = acc;
            out[j * d + i] = acc;
        }
    }
}
