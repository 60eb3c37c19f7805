use super::{gram, DiffusionField, Potential};
use crate::error::{Error, Result};

/// Step used for the finite-difference correction when no closed form exists.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Weight of the correction term in the drift.
///
/// `Unit` gives `b_a = −σσᵀ∇V + a²Υ`. `Half` gives `−σσᵀ∇V + (a²/2)Υ`, the
/// weight for which `exp(−2(V − V*)/a²)` is exactly stationary for
/// `dY = b_a dt + aσ dW`. With `Unit` the stationary law is tilted away from
/// that density (by a factor `σ²` in one dimension). The two coincide for
/// constant `σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrectionWeight {
    #[default]
    Unit,
    Half,
}

impl CorrectionWeight {
    pub fn factor(self) -> f64 {
        match self {
            CorrectionWeight::Unit => 1.0,
            CorrectionWeight::Half => 0.5,
        }
    }
}

/// Central-difference estimate of `Υ_i(x) = Σ_j ∂_j (σσᵀ)_ij(x)`.
pub fn fd_correction(sigma: &DiffusionField, x: &[f64], fd_step: f64) -> Result<Vec<f64>> {
    let d = sigma.dim();
    if x.len() != d {
        return Err(Error::arg("point dimension does not match sigma"));
    }
    if !(fd_step > 0.0) {
        return Err(Error::arg("finite-difference step must be positive"));
    }
    let mut out = vec![0.0; d];
    let mut xs = x.to_vec();
    let mut s = vec![0.0; d * d];
    let mut cp = vec![0.0; d * d];
    let mut cm = vec![0.0; d * d];
    for j in 0..d {
        xs[j] = x[j] + fd_step;
        sigma.sigma_into(&xs, &mut s);
        gram(&s, d, &mut cp);
        xs[j] = x[j] - fd_step;
        sigma.sigma_into(&xs, &mut s);
        gram(&s, d, &mut cm);
        xs[j] = x[j];
        if cp.iter().chain(cm.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Evaluation(format!("non-finite sigma entries near {x:?}")));
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += (cp[i * d + j] - cm[i * d + j]) / (2.0 * fd_step);
        }
    }
    Ok(out)
}

/// `Υ(x)`: the closed form when the field provides one, otherwise central
/// differences with step `fd_step`.
pub fn correction_term(sigma: &DiffusionField, x: &[f64], fd_step: f64) -> Result<Vec<f64>> {
    let d = sigma.dim();
    if x.len() != d {
        return Err(Error::arg("point dimension does not match sigma"));
    }
    let mut out = vec![0.0; d];
    if sigma.closed_correction(x, &mut out) {
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Evaluation(format!("non-finite correction at {x:?}")));
        }
        return Ok(out);
    }
    fd_correction(sigma, x, fd_step)
}

/// `b_a(x) = −(σσᵀ∇V)(x) + a²Υ(x)`.
pub fn drift(pot: &Potential, sigma: &DiffusionField, a: f64, x: &[f64]) -> Result<Vec<f64>> {
    drift_weighted(pot, sigma, a, x, CorrectionWeight::Unit)
}

pub fn drift_weighted(
    pot: &Potential,
    sigma: &DiffusionField,
    a: f64,
    x: &[f64],
    weight: CorrectionWeight,
) -> Result<Vec<f64>> {
    let d = pot.dim();
    if sigma.dim() != d || x.len() != d {
        return Err(Error::arg("potential, sigma and point dimensions differ"));
    }
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::arg(format!("annealing level must be finite and >= 0, got {a}")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::arg("drift point must be finite"));
    }
    let s = sigma.sigma(x);
    let g = pot.gradient(x);
    let ups = if a == 0.0 || sigma.is_constant() {
        vec![0.0; d]
    } else {
        correction_term(sigma, x, DEFAULT_FD_STEP)?
    };
    let mut out = vec![0.0; d];
    let mut scratch = vec![0.0; d];
    combine_drift(&s, &g, &ups, a * a * weight.factor(), d, &mut scratch, &mut out);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Evaluation(format!("non-finite drift at {x:?}")));
    }
    Ok(out)
}

/// `out = −σ(σᵀ g) + c·Υ`.
#[inline]
pub(crate) fn combine_drift(s: &[f64], g: &[f64], ups: &[f64], c: f64, d: usize, scratch: &mut [f64], out: &mut [f64]) {
    if d == 1 {
        out[0] = -s[0] * s[0] * g[0] + c * ups[0];
        return;
    }
    for k in 0..d {
        let mut acc = 0.0;
        for i in 0..d {
            acc += s[i * d + k] * g[i];
        }
        scratch[k] = acc;
    }
    for i in 0..d {
        let mut acc = 0.0;
        for k in 0..d {
            acc += s[i * d + k] * scratch[k];
        }
        out[i] = -acc + c * ups[i];
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::problem::builtins::Opaque;
    use crate::problem::{DiffusionMatrix, SinDiagonal};

    // Symbolic oracle: for s(u) = 2 + sin u, Υ = 2 s s' = 2(2 + sin u) cos u.
    fn upsilon_oracle(u: f64) -> f64 {
        2.0 * (2.0 + u.sin()) * u.cos()
    }

    fn opaque_sin(d: usize) -> DiffusionField {
        let inner: Arc<dyn DiffusionMatrix> = Arc::new(SinDiagonal::new(d, 2.0, 1.0));
        DiffusionField::new("opaque", Arc::new(Opaque(inner)), 1.0, 3.0).unwrap()
    }

    #[test]
    fn constant_sigma_has_zero_correction() {
        let s = DiffusionField::constant(2, vec![1.0, 0.3, -0.2, 2.0]).unwrap();
        assert_eq!(correction_term(&s, &[0.4, -1.2], 1e-4).unwrap(), vec![0.0, 0.0]);
        assert_eq!(fd_correction(&s, &[0.4, -1.2], 1e-4).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn sin_sigma_correction_1d_and_2d() {
        assert!((upsilon_oracle(0.0) - 4.0).abs() < 1e-15);
        let s1 = opaque_sin(1);
        let u = correction_term(&s1, &[0.0], 1e-4).unwrap();
        assert!((u[0] - 4.0).abs() < 1e-6);
        let s2 = opaque_sin(2);
        let u = correction_term(&s2, &[0.0, 0.0], 1e-4).unwrap();
        assert!((u[0] - 4.0).abs() < 1e-6 && (u[1] - 4.0).abs() < 1e-6);
        let closed = DiffusionField::sin_diagonal(2, 2.0, 1.0).unwrap();
        assert_eq!(correction_term(&closed, &[0.0, 0.0], 1e-4).unwrap(), vec![4.0, 4.0]);
    }

    #[test]
    fn drift_examples() {
        let quad = Potential::quadratic(1, 1.0).unwrap();
        let one = DiffusionField::scalar(1, 1.0).unwrap();
        assert_eq!(drift(&quad, &one, 0.5, &[2.0]).unwrap(), vec![-2.0]);
        let sin = DiffusionField::sin_diagonal(1, 2.0, 1.0).unwrap();
        let b = drift(&quad, &sin, 1.0, &[0.0]).unwrap();
        assert!((b[0] - 4.0).abs() < 1e-6);
        let half = drift_weighted(&quad, &sin, 1.0, &[0.0], CorrectionWeight::Half).unwrap();
        assert!((half[0] - 2.0).abs() < 1e-6);
    }

    // Zero probability flux `b p = (a²/2)(σ² p)'` for the claimed stationary density.
    #[test]
    fn stationary_densities_in_one_dimension() {
        let p = crate::problem::builtin_double_well(1, 1.0, 1.0, 4.0).unwrap();
        let s = DiffusionField::sin_diagonal(1, 2.0, 1.0).unwrap();
        let a: f64 = 0.8;
        let sig2 = |x: f64| s.sigma(&[x])[0].powi(2);
        let nu = |x: f64| (-2.0 * p.value(&[x]) / (a * a)).exp();
        let h = 1e-5;
        for x in [-1.7, -0.4, 0.3, 1.1, 2.2] {
            let cases: [(CorrectionWeight, &dyn Fn(f64) -> f64); 2] =
                [(CorrectionWeight::Half, &nu), (CorrectionWeight::Unit, &|y| sig2(y) * nu(y))];
            for (w, dens) in cases {
                let b = drift_weighted(&p, &s, a, &[x], w).unwrap()[0];
                let flux = |y: f64| sig2(y) * dens(y);
                let rhs = 0.5 * a * a * (flux(x + h) - flux(x - h)) / (2.0 * h);
                let lhs = b * dens(x);
                assert!((lhs - rhs).abs() <= 1e-6 * (lhs.abs() + rhs.abs() + 1e-12), "{w:?} at {x}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn drift_vanishes_at_minimizers_without_noise() {
        let p = crate::problem::builtin_double_well(2, 1.0, 1.0, 4.0).unwrap();
        let s = DiffusionField::sin_diagonal(2, 2.0, 1.0).unwrap();
        for m in p.minimizers() {
            let b = drift(&p, &s, 0.0, &m.location).unwrap();
            assert!(b.iter().all(|v| v.abs() <= 1e-8));
        }
    }

    #[test]
    fn drift_rejects_negative_level() {
        let quad = Potential::quadratic(1, 1.0).unwrap();
        let one = DiffusionField::scalar(1, 1.0).unwrap();
        assert!(drift(&quad, &one, -0.1, &[0.0]).is_err());
    }
}
