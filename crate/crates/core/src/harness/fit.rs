use std::fmt;

use super::Table;
use crate::error::{Error, Result};

/// Range of decay exponents the annealing bounds allow.
pub const PREDICTED_EXPONENT_RANGE: (f64, f64) = (0.0, 1.0);

const MIN_FIT_POINTS: usize = 5;

/// Power law `value ≈ e^intercept · t^(−exponent)` fitted in log-log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub points: usize,
}

impl fmt::Display for RateFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = PREDICTED_EXPONENT_RANGE;
        write!(
            f,
            "exponent {:.4} (predicted range ({lo}, {hi})), intercept {:.4}, r^2 {:.4}, {} points in [{}, {}]",
            self.exponent, self.intercept, self.r_squared, self.points, self.window.0, self.window.1
        )
    }
}

/// Least-squares fit of `log(value)` against `log(t)` over `t ∈ [t_min, t_max]`.
pub fn fit_power_law(ts: &[f64], values: &[f64], window: (f64, f64)) -> Result<RateFit> {
    let (t_min, t_max) = window;
    if !(t_min > 0.0) || !(t_max >= t_min) {
        return Err(Error::arg(format!("fit window needs 0 < t_min <= t_max, got [{t_min}, {t_max}]")));
    }
    if ts.len() != values.len() {
        return Err(Error::arg("time and value columns differ in length"));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in ts.iter().zip(values) {
        if t < t_min || t > t_max {
            continue;
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Metric(format!(
                "value {v} at t = {t} is not positive; the noise floor is probably reached, shrink the window"
            )));
        }
        xs.push(t.ln());
        ys.push(v.ln());
    }
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::Metric(format!(
            "{} points in [{t_min}, {t_max}], need at least {MIN_FIT_POINTS}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Metric("all fit points share one time".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(RateFit {
        exponent: -slope,
        intercept,
        r_squared,
        window,
        points: xs.len(),
    })
}

/// Fits `column` of a trace against its `t` column.
pub fn fit_rate(trace: &Table, column: &str, window: (f64, f64)) -> Result<RateFit> {
    fit_power_law(&trace.column("t")?, &trace.column(column)?, window)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(f: impl Fn(f64) -> f64) -> Table {
        let mut t = Table::new(["t", "v"]);
        for k in 0..10 {
            let x = 2f64.powi(k);
            t.push(vec![x, f(x)]);
        }
        t
    }

    #[test]
    fn exact_power_law() {
        let fit = fit_rate(&table(|t| t.powf(-0.5)), "v", (1.0, 512.0)).unwrap();
        assert!((fit.exponent - 0.5).abs() < 1e-6);
        assert!(fit.r_squared > 0.9999);
        assert_eq!(fit.points, 10);
    }

    #[test]
    fn constant_column() {
        let fit = fit_rate(&table(|_| 0.3), "v", (1.0, 512.0)).unwrap();
        assert!(fit.exponent.abs() < 1e-6);
        assert!((0.0..=1.0).contains(&fit.r_squared));
    }

    #[test]
    fn errors() {
        let t = table(|t| 1.0 - t.log2() / 5.0);
        assert!(matches!(fit_rate(&t, "v", (1.0, 512.0)), Err(Error::Metric(_))));
        assert!(matches!(fit_rate(&t, "v", (1.0, 8.0)), Err(Error::Metric(_))));
        assert!(fit_rate(&t, "v", (0.0, 8.0)).is_err());
        assert!(fit_rate(&t, "missing", (1.0, 8.0)).is_err());
    }
}
