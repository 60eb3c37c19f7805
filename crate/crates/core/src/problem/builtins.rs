//! Code-registered test problems.

use std::sync::Arc;

use super::{DiffusionMatrix, Minimizer, Objective, Potential, PotentialMeta};
use crate::error::{Error, Result};

/// `V(x) = 1 + (k/2)|x|²`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    dim: usize,
    curvature: f64,
}

impl Quadratic {
    pub fn new(dim: usize, curvature: f64) -> Self {
        Self { dim, curvature }
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        1.0 + 0.5 * self.curvature * x.iter().map(|v| v * v).sum::<f64>()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(x) {
            *o = self.curvature * v;
        }
    }

    fn hessian(&self, _x: &[f64], out: &mut [f64]) -> bool {
        out.fill(0.0);
        for i in 0..self.dim {
            out[i * self.dim + i] = self.curvature;
        }
        true
    }
}

/// Double well along the first axis with quadratic transverse directions.
///
/// On `|x_1| <= r` the first coordinate follows
/// `1 + exp(α + β x_1)(x_1² − s²)²`, which has minima of value 1 at `±s`
/// with curvatures chosen through `α, β`. Beyond `r = s + 2` the profile is
/// continued by its second-order Taylor polynomial at `±r`, so the function
/// is C² with bounded Hessian. The remaining coordinates add `|x_⊥|²/2`.
#[derive(Debug, Clone)]
pub struct DoubleWell {
    dim: usize,
    sep: f64,
    log_scale: f64,
    tilt: f64,
    splice: f64,
    right: [f64; 3],
    left: [f64; 3],
}

impl DoubleWell {
    fn new(dim: usize, sep: f64, hess_left: f64, hess_right: f64) -> Self {
        let tilt = (hess_right / hess_left).ln() / (2.0 * sep);
        let log_scale = ((hess_left * hess_right).sqrt() / (8.0 * sep * sep)).ln();
        let splice = sep + 2.0;
        let mut dw = Self {
            dim,
            sep,
            log_scale,
            tilt,
            splice,
            right: [0.0; 3],
            left: [0.0; 3],
        };
        dw.right = dw.core(splice);
        dw.left = dw.core(-splice);
        dw
    }

    /// Value and first two derivatives of the unspliced core.
    fn core(&self, x: f64) -> [f64; 3] {
        let w = (self.log_scale + self.tilt * x).exp();
        let s2 = self.sep * self.sep;
        let u = x * x - s2;
        let q = u * u;
        let q1 = 4.0 * x * u;
        let q2 = 12.0 * x * x - 4.0 * s2;
        let b = self.tilt;
        [1.0 + w * q, w * (b * q + q1), w * (b * b * q + 2.0 * b * q1 + q2)]
    }

    /// Value and first two derivatives of the spliced profile.
    pub fn profile(&self, x: f64) -> [f64; 3] {
        let (anchor, dx) = if x > self.splice {
            (self.right, x - self.splice)
        } else if x < -self.splice {
            (self.left, x + self.splice)
        } else {
            return self.core(x);
        };
        [
            anchor[0] + anchor[1] * dx + 0.5 * anchor[2] * dx * dx,
            anchor[1] + anchor[2] * dx,
            anchor[2],
        ]
    }

    pub fn splice_radius(&self) -> f64 {
        self.splice
    }
}

impl Objective for DoubleWell {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.profile(x[0])[0] + 0.5 * x[1..].iter().map(|v| v * v).sum::<f64>()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        out[0] = self.profile(x[0])[1];
        for i in 1..self.dim {
            out[i] = x[i];
        }
    }

    fn value_and_gradient(&self, x: &[f64], out: &mut [f64]) -> f64 {
        let p = self.profile(x[0]);
        out[0] = p[1];
        let mut v = p[0];
        for i in 1..self.dim {
            out[i] = x[i];
            v += 0.5 * x[i] * x[i];
        }
        v
    }

    fn hessian(&self, x: &[f64], out: &mut [f64]) -> bool {
        out.fill(0.0);
        out[0] = self.profile(x[0])[2];
        for i in 1..self.dim {
            out[i * self.dim + i] = 1.0;
        }
        true
    }
}

/// Builds the double-well potential with minimizers `±well_sep·e_1`,
/// `V* = 1` and Hessian determinants `hess_left`, `hess_right` at the left
/// and right wells. Transverse curvatures are 1, so each determinant equals
/// the curvature of the first-axis profile at that well.
///
/// The dissipativity radius `R0` stored in the metadata is the smallest
/// quarter-multiple radius outside which the profile is convex, plus 0.5.
pub fn builtin_double_well(d: usize, well_sep: f64, hess_left: f64, hess_right: f64) -> Result<Potential> {
    if d == 0 {
        return Err(Error::arg("double well dimension must be positive"));
    }
    if !(well_sep > 0.0) {
        return Err(Error::arg(format!("well_sep must be positive, got {well_sep}")));
    }
    if !(hess_left > 0.0) || !(hess_right > 0.0) {
        return Err(Error::arg(format!(
            "hessian determinants must be positive, got {hess_left} and {hess_right}"
        )));
    }
    let dw = DoubleWell::new(d, well_sep, hess_left, hess_right);
    // The tails must be increasing convex parabolas.
    if !(dw.right[1] > 0.0 && dw.right[2] > 0.0 && dw.left[1] < 0.0 && dw.left[2] > 0.0) {
        return Err(Error::arg(format!(
            "hessian ratio {hess_left}:{hess_right} is too extreme for a convex splice at radius {}",
            dw.splice
        )));
    }
    let step = 1e-3;
    let mut inflection: f64 = 0.0;
    let mut x = 0.0;
    while x <= dw.splice {
        if dw.core(x)[2] <= 0.0 || dw.core(-x)[2] <= 0.0 {
            inflection = x;
        }
        x += step;
    }
    let r0 = ((inflection + 0.5) * 4.0).ceil() / 4.0;
    let mut left = vec![0.0; d];
    left[0] = -well_sep;
    let mut right = vec![0.0; d];
    right[0] = well_sep;
    let meta = PotentialMeta {
        splice_radius: Some(dw.splice),
        dissipative_radius: Some(r0),
    };
    Potential::new(
        "double_well",
        Arc::new(dw),
        vec![
            Minimizer {
                location: left,
                hessian_det: hess_left,
            },
            Minimizer {
                location: right,
                hessian_det: hess_right,
            },
        ],
        1.0,
        meta,
    )
}

impl Potential {
    pub fn double_well(d: usize, well_sep: f64, hess_left: f64, hess_right: f64) -> Result<Potential> {
        builtin_double_well(d, well_sep, hess_left, hess_right)
    }
}

#[derive(Debug, Clone)]
pub struct ConstantSigma {
    dim: usize,
    matrix: Vec<f64>,
}

impl ConstantSigma {
    pub fn new(dim: usize, matrix: Vec<f64>) -> Self {
        Self { dim, matrix }
    }
}

impl DiffusionMatrix for ConstantSigma {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sigma(&self, _x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.matrix);
    }

    fn correction(&self, _x: &[f64], out: &mut [f64]) -> bool {
        out.fill(0.0);
        true
    }

    fn is_constant(&self) -> bool {
        true
    }
}

/// `σ(x) = diag(base + amp·sin(x_i))`; closed-form correction
/// `Υ_i = 2 s(x_i) s'(x_i)`.
#[derive(Debug, Clone)]
pub struct SinDiagonal {
    dim: usize,
    base: f64,
    amp: f64,
}

impl SinDiagonal {
    pub fn new(dim: usize, base: f64, amp: f64) -> Self {
        Self { dim, base, amp }
    }
}

impl DiffusionMatrix for SinDiagonal {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sigma(&self, x: &[f64], out: &mut [f64]) {
        if self.dim == 1 {
            out[0] = self.base + self.amp * x[0].sin();
            return;
        }
        out.fill(0.0);
        for i in 0..self.dim {
            out[i * self.dim + i] = self.base + self.amp * x[i].sin();
        }
    }

    fn correction(&self, x: &[f64], out: &mut [f64]) -> bool {
        for (o, &xi) in out.iter_mut().zip(x) {
            let (s, c) = xi.sin_cos();
            *o = 2.0 * (self.base + self.amp * s) * self.amp * c;
        }
        true
    }
}

/// Wraps a field and hides its closed-form correction, forcing the
/// finite-difference path.
#[cfg(test)]
#[derive(Debug, Clone)]
pub(crate) struct Opaque(pub Arc<dyn DiffusionMatrix>);

#[cfg(test)]
impl DiffusionMatrix for Opaque {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn sigma(&self, x: &[f64], out: &mut [f64]) {
        self.0.sigma(x, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
    }

    #[test]
    fn symmetric_wells() {
        let p = builtin_double_well(1, 1.0, 8.0, 8.0).unwrap();
        for x in [-1.0, 1.0] {
            assert!((p.value(&[x]) - 1.0).abs() < 1e-10);
            assert!(p.gradient(&[x])[0].abs() < 1e-10);
        }
        for k in 0..=200 {
            let x = -10.0 + 0.1 * k as f64;
            assert!((p.value(&[x]) - p.value(&[-x])).abs() < 1e-12 * p.value(&[x]).max(1.0));
        }
        let locs: Vec<f64> = p.minimizers().iter().map(|m| m.location[0]).collect();
        assert_eq!(locs, vec![-1.0, 1.0]);
    }

    #[test]
    fn asymmetric_curvatures_by_differences() {
        let p = builtin_double_well(1, 1.0, 1.0, 4.0).unwrap();
        let v = |x: f64| p.value(&[x]);
        assert!((fd2(v, -1.0, 1e-4) - 1.0).abs() < 1e-6);
        assert!((fd2(v, 1.0, 1e-4) - 4.0).abs() < 1e-6);
        assert_eq!(p.meta().splice_radius, Some(3.0));
    }

    #[test]
    fn splice_is_c2() {
        let p = builtin_double_well(1, 1.5, 2.0, 3.0).unwrap();
        let r = p.meta().splice_radius.unwrap();
        for side in [-1.0, 1.0] {
            let x = side * r;
            let e = 1e-9;
            let a = p.hessian(&[x - e])[0];
            let b = p.hessian(&[x + e])[0];
            assert!((a - b).abs() < 1e-6 * a.abs().max(1.0));
            let ga = p.gradient(&[x - e])[0];
            let gb = p.gradient(&[x + e])[0];
            assert!((ga - gb).abs() < 1e-6);
        }
    }

    #[test]
    fn gradient_matches_differences_in_3d() {
        let p = builtin_double_well(3, 1.0, 1.0, 4.0).unwrap();
        let h = 1e-6;
        for k in 0..50 {
            let t = k as f64 / 49.0;
            let x = [-5.0 + 10.0 * t, 5.0 - 7.0 * t, 2.0 * t - 1.0];
            let g = p.gradient(&x);
            for i in 0..3 {
                let mut xp = x;
                let mut xm = x;
                xp[i] += h;
                xm[i] -= h;
                let fd = (p.value(&xp) - p.value(&xm)) / (2.0 * h);
                assert!((g[i] - fd).abs() < 1e-6 * g[i].abs().max(1.0), "axis {i} at {x:?}");
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(builtin_double_well(1, 1.0, 0.0, 1.0).is_err());
        assert!(builtin_double_well(1, 1.0, 1.0, -2.0).is_err());
        assert!(builtin_double_well(1, 0.0, 1.0, 1.0).is_err());
        assert!(builtin_double_well(0, 1.0, 1.0, 1.0).is_err());
    }
}
