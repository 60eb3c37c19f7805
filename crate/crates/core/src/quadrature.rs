//! Adaptive Gauss–Kronrod (7/15) quadrature on intervals and small boxes.
//!
//! The 1D driver bisects the interval with the largest error estimate until
//! the summed estimate falls below `max(abs_tol, rel_tol * |value|)`. Boxes in
//! up to three dimensions are handled by nesting the 1D driver.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes (XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Number of equal pieces each interval between breakpoints starts with.
    pub initial_pieces: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 4000,
            initial_pieces: 8,
        }
    }
}

impl QuadOptions {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let f_center = f(center);
    let mut res_k = f_center * WGK[7];
    let mut res_g = f_center * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let err = rescale_error((res_k - res_g) * half, res_abs * half.abs(), res_asc * half.abs());
    (value, err)
}

/// Integrates `f` over `[lo, hi]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, lo: f64, hi: f64, opts: &QuadOptions) -> Result<Integral> {
    integrate_with_breaks(f, &[lo, hi], opts)
}

/// Integrates `f` over `[breaks[0], breaks.last()]`, seeding the partition with
/// every breakpoint. Breakpoints must be sorted.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    opts: &QuadOptions,
) -> Result<Integral> {
    if breaks.len() < 2 {
        return Err(Error::arg("quadrature needs at least two breakpoints"));
    }
    if breaks.iter().any(|b| !b.is_finite()) || breaks.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::arg("quadrature breakpoints must be finite and sorted"));
    }
    let pieces = opts.initial_pieces.max(1);
    let mut heap = BinaryHeap::new();
    let mut value = 0.0;
    let mut error = 0.0;
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let step = (w[1] - w[0]) / pieces as f64;
        for k in 0..pieces {
            let lo = w[0] + step * k as f64;
            let hi = if k + 1 == pieces { w[1] } else { lo + step };
            let (v, e) = gk15(&mut f, lo, hi);
            evaluations += 15;
            value += v;
            error += e;
            heap.push(Piece { lo, hi, value: v, error: e });
        }
    }
    if !value.is_finite() {
        return Err(Error::Quadrature("integrand produced a non-finite value".into()));
    }
    let mut splits = 0;
    while error > opts.abs_tol.max(opts.rel_tol * value.abs()) {
        if splits >= opts.max_subdivisions {
            return Err(Error::Quadrature(format!(
                "no convergence after {splits} subdivisions (estimate {value:.6e}, error {error:.3e})"
            )));
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // Interval cannot be split further in floating point.
            heap.push(Piece { error: 0.0, ..worst });
            error -= worst.error;
            continue;
        }
        let (v1, e1) = gk15(&mut f, worst.lo, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.hi);
        evaluations += 30;
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Piece { lo: worst.lo, hi: mid, value: v1, error: e1 });
        heap.push(Piece { lo: mid, hi: worst.hi, value: v2, error: e2 });
        splits += 1;
        if !value.is_finite() {
            return Err(Error::Quadrature("integrand produced a non-finite value".into()));
        }
    }
    // Re-sum to shed accumulated rounding from the running updates.
    let value = heap.iter().map(|p| p.value).sum();
    let abs_error = heap.iter().map(|p| p.error).sum();
    Ok(Integral {
        value,
        abs_error,
        evaluations,
    })
}

/// Integrates `|f|` over `[lo, hi]`. Sign changes are located on a scan grid
/// and refined by bisection so that each smooth piece is integrated without
/// the kink of the absolute value.
pub fn integrate_abs<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, scan: usize, opts: &QuadOptions) -> Result<Integral> {
    let scan = scan.max(2);
    let h = (hi - lo) / scan as f64;
    let mut breaks = vec![lo];
    let mut x_prev = lo;
    let mut f_prev = f(lo);
    for k in 1..=scan {
        let x = if k == scan { hi } else { lo + h * k as f64 };
        let fx = f(x);
        if f_prev != 0.0 && fx != 0.0 && (f_prev < 0.0) != (fx < 0.0) {
            let (mut a, mut b, mut fa) = (x_prev, x, f_prev);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let fm = f(m);
                if (fm < 0.0) == (fa < 0.0) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            breaks.push(0.5 * (a + b));
        }
        x_prev = x;
        f_prev = fx;
    }
    breaks.push(hi);
    let single = QuadOptions {
        initial_pieces: 1,
        ..*opts
    };
    let mut total = Integral {
        value: 0.0,
        abs_error: 0.0,
        evaluations: scan + 1,
    };
    let n_pieces = (breaks.len() - 1) as f64;
    let piece_opts = QuadOptions {
        abs_tol: opts.abs_tol / n_pieces,
        ..single
    };
    for w in breaks.windows(2) {
        let r = integrate_with_breaks(&mut f, w, &piece_opts)?;
        total.value += r.value.abs();
        total.abs_error += r.abs_error;
        total.evaluations += r.evaluations;
    }
    Ok(total)
}

/// Integrates `f` over the box `lo × hi` (dimension 1 to 3) by nested 1D
/// quadrature. `breaks[k]` lists interior breakpoints along axis `k`.
/// With `absolute`, the innermost axis integrates `|f|` with sign-change
/// splitting.
pub fn integrate_box<F: Fn(&[f64]) -> f64>(
    f: F,
    lo: &[f64],
    hi: &[f64],
    breaks: &[Vec<f64>],
    absolute: bool,
    opts: &QuadOptions,
) -> Result<Integral> {
    let d = lo.len();
    if d == 0 || d > 3 || hi.len() != d || breaks.len() != d {
        return Err(Error::UnsupportedDimension {
            dim: d,
            hint: "box quadrature supports dimensions 1 to 3",
        });
    }
    // Outer axes start from the breakpoints alone.
    let opts = &QuadOptions {
        initial_pieces: if d == 1 { opts.initial_pieces } else { 1 },
        ..*opts
    };
    let mut point = vec![0.0; d];
    let mut evaluations = 0usize;
    let value = nested(&f, lo, hi, breaks, absolute, opts, 0, &mut point, &mut evaluations)?;
    Ok(Integral {
        value: value.value,
        abs_error: value.abs_error,
        evaluations,
    })
}

fn axis_breaks(lo: f64, hi: f64, interior: &[f64]) -> Vec<f64> {
    let mut b = vec![lo];
    b.extend(interior.iter().copied().filter(|&x| x > lo && x < hi));
    b.push(hi);
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

#[allow(clippy::too_many_arguments)]
fn nested<F: Fn(&[f64]) -> f64>(
    f: &F,
    lo: &[f64],
    hi: &[f64],
    breaks: &[Vec<f64>],
    absolute: bool,
    opts: &QuadOptions,
    axis: usize,
    point: &mut Vec<f64>,
    evaluations: &mut usize,
) -> Result<Integral> {
    let d = lo.len();
    let b = axis_breaks(lo[axis], hi[axis], &breaks[axis]);
    if axis + 1 == d {
        let r = if absolute {
            let scan = 64 * (b.len() - 1);
            let mut g = |x: f64| {
                point[axis] = x;
                f(point)
            };
            integrate_abs(&mut g, lo[axis], hi[axis], scan, opts)?
        } else {
            let mut g = |x: f64| {
                point[axis] = x;
                f(point)
            };
            integrate_with_breaks(&mut g, &b, opts)?
        };
        *evaluations += r.evaluations;
        return Ok(r);
    }
    // Inner integrals run at a tighter tolerance so their noise does not
    // dominate the outer error estimate.
    let width: f64 = (axis..d).map(|k| hi[k] - lo[k]).product::<f64>().max(1.0);
    let inner_opts = QuadOptions {
        abs_tol: opts.abs_tol / (10.0 * width),
        rel_tol: opts.rel_tol / 10.0,
        ..*opts
    };
    let mut failure = None;
    let mut scratch = point.clone();
    let mut g = |x: f64| {
        scratch[axis] = x;
        match nested(f, lo, hi, breaks, absolute, &inner_opts, axis + 1, &mut scratch, evaluations) {
            Ok(r) => r.value,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let r = integrate_with_breaks(&mut g, &b, opts)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 2.0, &QuadOptions::default()).unwrap();
        // [x^4/4 - x^2 + x] from -1 to 2 = (4 - 4 + 2) - (0.25 - 1 - 1) = 3.75
        assert!((r.value - 3.75).abs() < 1e-13);
    }

    #[test]
    fn gaussian_integral() {
        let r = integrate(|x: f64| (-x * x).exp(), -12.0, 12.0, &QuadOptions::with_tol(1e-14, 1e-13)).unwrap();
        assert!((r.value - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn narrow_peak_found_via_breakpoint() {
        let f = |x: f64| (-(x - 0.3f64).powi(2) / 1e-6).exp();
        let r = integrate_with_breaks(f, &[-10.0, 0.29, 0.299, 0.3, 0.301, 0.31, 10.0], &QuadOptions::default()).unwrap();
        assert!((r.value - (PI * 1e-6).sqrt()).abs() < 1e-12, "{r:?} {}", (PI * 1e-6).sqrt());
    }

    #[test]
    fn absolute_value_with_kinks() {
        let r = integrate_abs(|x: f64| x.sin(), 0.0, 2.0 * PI, 64, &QuadOptions::default()).unwrap();
        assert!((r.value - 4.0).abs() < 1e-10);
    }

    #[test]
    fn box_gaussian_2d_and_3d() {
        let opts = QuadOptions::with_tol(1e-10, 1e-9);
        let f2 = |x: &[f64]| (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp();
        let r = integrate_box(f2, &[-9.0, -9.0], &[9.0, 9.0], &[vec![], vec![]], false, &opts).unwrap();
        assert!((r.value - PI / 2f64.sqrt()).abs() < 1e-8);
        let f3 = |x: &[f64]| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp();
        let r = integrate_box(f3, &[-7.0; 3], &[7.0; 3], &[vec![], vec![], vec![]], false, &opts).unwrap();
        assert!((r.value - PI.powf(1.5)).abs() < 1e-7);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(integrate_with_breaks(|x| x, &[1.0], &QuadOptions::default()).is_err());
        assert!(integrate_with_breaks(|x| x, &[1.0, 0.0], &QuadOptions::default()).is_err());
        assert!(integrate_box(|_| 1.0, &[0.0; 4], &[1.0; 4], &vec![vec![]; 4], false, &QuadOptions::default()).is_err());
    }
}
