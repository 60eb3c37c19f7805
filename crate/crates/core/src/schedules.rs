//! Annealing level `a(t)`, decreasing step sequences with their clock
//! `Γ_n`, and the plateau grid `T_n`.

use std::fmt;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};

/// `a(t) = A / sqrt(log(t + e))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealSchedule {
    amplitude: f64,
}

impl AnnealSchedule {
    pub fn new(amplitude: f64) -> Result<Self> {
        if !(amplitude > 0.0) || !amplitude.is_finite() {
            return Err(Error::arg(format!("schedule amplitude A must be positive, got {amplitude}")));
        }
        Ok(Self { amplitude })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Unchecked evaluation for hot loops; `t` must be non-negative.
    #[inline]
    pub fn level(&self, t: f64) -> f64 {
        self.amplitude / (t + std::f64::consts::E).ln().sqrt()
    }

    pub fn a_of_t(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::arg(format!("time must be non-negative, got {t}")));
        }
        Ok(self.level(t))
    }
}

pub fn a_of_t(s: &AnnealSchedule, t: f64) -> Result<f64> {
    s.a_of_t(t)
}

#[derive(Clone)]
pub enum StepRule {
    /// `γ_n = gamma1 · n^(−eta)`, `eta ∈ (1/2, 1]`.
    Power { gamma1: f64, eta: f64 },
    /// Arbitrary positive non-increasing sequence, indexed from 1. Not
    /// checked against the step assumptions.
    Custom(Arc<dyn Fn(u64) -> f64 + Send + Sync>),
}

impl fmt::Debug for StepRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepRule::Power { gamma1, eta } => f
                .debug_struct("Power")
                .field("gamma1", gamma1)
                .field("eta", eta)
                .finish(),
            StepRule::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

const MAX_CACHED_STEPS: usize = 1 << 25;

/// Step sequence with a lazily grown prefix-sum cache `Γ_0 = 0, Γ_1, ...`.
///
/// The cache only grows; concurrent readers share it behind a lock and a
/// single writer extends it by doubling.
#[derive(Debug, Clone)]
pub struct StepSequence {
    rule: StepRule,
    prefix: Arc<RwLock<Vec<f64>>>,
}

impl StepSequence {
    pub fn power(gamma1: f64, eta: f64) -> Result<Self> {
        if !(gamma1 > 0.0) || !gamma1.is_finite() {
            return Err(Error::arg(format!("gamma1 must be positive, got {gamma1}")));
        }
        if !(eta > 0.5 && eta <= 1.0) {
            return Err(Error::arg(format!("eta must lie in (1/2, 1], got {eta}")));
        }
        Ok(Self::from_rule(StepRule::Power { gamma1, eta }))
    }

    pub fn custom(f: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Self {
        Self::from_rule(StepRule::Custom(Arc::new(f)))
    }

    fn from_rule(rule: StepRule) -> Self {
        Self {
            rule,
            prefix: Arc::new(RwLock::new(vec![0.0])),
        }
    }

    pub fn rule(&self) -> &StepRule {
        &self.rule
    }

    /// `γ_n` for `n >= 1`.
    #[inline]
    pub fn gamma(&self, n: u64) -> f64 {
        debug_assert!(n >= 1);
        match &self.rule {
            StepRule::Power { gamma1, eta } => {
                if *eta == 1.0 {
                    gamma1 / n as f64
                } else {
                    gamma1 * (n as f64).powf(-eta)
                }
            }
            StepRule::Custom(f) => f(n),
        }
    }

    fn ensure(&self, len: usize) -> Result<()> {
        if self.prefix.read().expect("prefix cache poisoned").len() >= len {
            return Ok(());
        }
        if len > MAX_CACHED_STEPS {
            return Err(Error::arg(format!(
                "step clock needs more than {MAX_CACHED_STEPS} cached steps"
            )));
        }
        let mut cache = self.prefix.write().expect("prefix cache poisoned");
        let target = len.max(2 * cache.len()).min(MAX_CACHED_STEPS);
        let mut acc = *cache.last().unwrap();
        for n in cache.len()..target {
            acc += self.gamma(n as u64);
            cache.push(acc);
        }
        Ok(())
    }

    /// `Γ_n = γ_1 + ... + γ_n`, `Γ_0 = 0`.
    pub fn cumulative(&self, n: usize) -> Result<f64> {
        self.ensure(n + 1)?;
        Ok(self.prefix.read().expect("prefix cache poisoned")[n])
    }

    /// `N(t) = max{k >= 0 : Γ_k <= t}`, found by bisection over the cache.
    pub fn n_of_t(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0) {
            return Err(Error::arg(format!("time must be non-negative, got {t}")));
        }
        loop {
            {
                let cache = self.prefix.read().expect("prefix cache poisoned");
                if *cache.last().unwrap() > t {
                    return Ok(cache.partition_point(|&g| g <= t) - 1);
                }
            }
            let len = self.prefix.read().expect("prefix cache poisoned").len();
            self.ensure(2 * len)?;
        }
    }

    /// Windowed proxy for `limsup (γ_n − γ_{n+1}) / γ_{n+1}²`: the maximum
    /// over `n ∈ [n_max/2, n_max]`.
    pub fn varpi_estimate(&self, n_max: u64) -> Result<f64> {
        if n_max < 10 {
            return Err(Error::arg("varpi estimate needs n_max >= 10"));
        }
        Ok((n_max / 2..=n_max)
            .map(|n| {
                let next = self.gamma(n + 1);
                (self.gamma(n) - next) / (next * next)
            })
            .fold(f64::NEG_INFINITY, f64::max))
    }
}

/// `T_n = c_T · n^(1+β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateauSchedule {
    c_t: f64,
    beta: f64,
}

impl PlateauSchedule {
    pub fn new(c_t: f64, beta: f64) -> Result<Self> {
        if !(c_t > 0.0) || !(beta > 0.0) {
            return Err(Error::arg(format!("plateau schedule needs c_T > 0 and beta > 0, got {c_t}, {beta}")));
        }
        Ok(Self { c_t, beta })
    }

    pub fn c_t(&self) -> f64 {
        self.c_t
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    #[inline]
    pub fn time(&self, n: u64) -> f64 {
        self.c_t * (n as f64).powf(1.0 + self.beta)
    }

    /// The plateau `k` with `T_k <= t < T_{k+1}`.
    pub fn index_at(&self, t: f64) -> u64 {
        let mut k = (t / self.c_t).max(0.0).powf(1.0 / (1.0 + self.beta)).floor() as u64;
        while k > 0 && self.time(k) > t {
            k -= 1;
        }
        while self.time(k + 1) <= t {
            k += 1;
        }
        k
    }
}

/// `(T_n, a_n)` with `a_n = a(T_n)`.
pub fn plateau_times(ps: &PlateauSchedule, s: &AnnealSchedule, n: u64) -> (f64, f64) {
    let t = ps.time(n);
    (t, s.level(t))
}
