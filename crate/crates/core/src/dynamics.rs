//! Ensemble simulators for the annealed Langevin processes.
//!
//! * [`simulate_euler_scheme`]: the decreasing-step Euler–Maruyama scheme
//!   `Ȳ` with stochastic-gradient noise, recorded through its genuine
//!   continuous interpolation.
//! * [`simulate_continuous`]: the SDE `Y` with the continuous schedule,
//!   approximated by constant micro-steps.
//! * [`simulate_plateau`]: the process `X` whose level is frozen at
//!   `a_{k+1}` on each plateau `[T_k, T_{k+1})`.
//!
//! Every trajectory draws from its own counter-based ChaCha stream keyed by
//! `(seed, trajectory index)`, so results do not depend on how trajectories
//! are spread across worker threads.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::EmpiricalMeasure;
use crate::problem::{combine_drift, correction_term, CorrectionWeight, DiffusionField, Potential, DEFAULT_FD_STEP};
use crate::quadrature::{integrate, QuadOptions};
use crate::schedules::{AnnealSchedule, PlateauSchedule, StepSequence};

/// Trajectories whose norm exceeds this are treated as diverged.
pub const DIVERGENCE_NORM: f64 = 1e6;

const BRIDGE_STREAM_KEY: u64 = 0x9e37_79b9_7f4a_7c15;

/// Stochastic-gradient noise `ζ`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum NoiseModel {
    #[default]
    None,
    /// `ζ(x) = c_zeta · V(x)^{1/2} · g` with `g` standard Gaussian.
    GaussianScaled { c_zeta: f64 },
}

#[derive(Debug, Clone)]
pub struct SimSpec {
    pub potential: Potential,
    pub sigma: DiffusionField,
    pub schedule: AnnealSchedule,
    /// Step sequence for the Euler scheme.
    pub steps: Option<StepSequence>,
    /// Micro-step for the continuous and plateau processes.
    pub fine_dt: Option<f64>,
    pub plateau: Option<PlateauSchedule>,
    pub noise: NoiseModel,
    pub x0: Vec<f64>,
    pub horizon: f64,
    pub seed: u64,
    pub record_times: Vec<f64>,
    /// Replaces `a(t)` by a constant when set.
    pub frozen_level: Option<f64>,
    pub drift_enabled: bool,
    pub correction: CorrectionWeight,
    /// Step for the finite-difference correction when `σ` has no closed form.
    pub fd_step: f64,
}

impl SimSpec {
    /// A spec with no clock configured, no gradient noise, drift on and the
    /// unit correction weight. Records only at the horizon.
    pub fn new(potential: Potential, sigma: DiffusionField, schedule: AnnealSchedule, x0: Vec<f64>, horizon: f64) -> Self {
        Self {
            potential,
            sigma,
            schedule,
            steps: None,
            fine_dt: None,
            plateau: None,
            noise: NoiseModel::None,
            x0,
            horizon,
            seed: 0,
            record_times: vec![horizon],
            frozen_level: None,
            drift_enabled: true,
            correction: CorrectionWeight::Unit,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    pub fn with_steps(mut self, steps: StepSequence) -> Self {
        self.steps = Some(steps);
        self
    }

    pub fn with_fine_dt(mut self, dt: f64) -> Self {
        self.fine_dt = Some(dt);
        self
    }

    pub fn with_plateau(mut self, plateau: PlateauSchedule) -> Self {
        self.plateau = Some(plateau);
        self
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_record_times(mut self, times: Vec<f64>) -> Self {
        self.record_times = times;
        self
    }

    pub fn frozen(mut self, level: f64) -> Self {
        self.frozen_level = Some(level);
        self
    }

    pub fn without_drift(mut self) -> Self {
        self.drift_enabled = false;
        self
    }

    pub fn with_correction(mut self, weight: CorrectionWeight) -> Self {
        self.correction = weight;
        self
    }

    fn validate(&self, n_traj: usize) -> Result<()> {
        let d = self.potential.dim();
        if self.sigma.dim() != d || self.x0.len() != d {
            return Err(Error::arg("potential, sigma and x0 dimensions differ"));
        }
        if n_traj == 0 {
            return Err(Error::arg("need at least one trajectory"));
        }
        if !(self.horizon >= 0.0) || !self.horizon.is_finite() {
            return Err(Error::arg(format!("horizon must be finite and >= 0, got {}", self.horizon)));
        }
        if self.record_times.is_empty() {
            return Err(Error::arg("record_times is empty"));
        }
        if self.record_times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::arg("record_times must be sorted"));
        }
        if self.record_times[0] < 0.0 || *self.record_times.last().unwrap() > self.horizon {
            return Err(Error::arg("record_times must lie in [0, horizon]"));
        }
        if let Some(a) = self.frozen_level {
            if !(a >= 0.0) || !a.is_finite() {
                return Err(Error::arg(format!("frozen level must be finite and >= 0, got {a}")));
            }
        }
        if let NoiseModel::GaussianScaled { c_zeta } = self.noise {
            if !(c_zeta >= 0.0) {
                return Err(Error::arg("c_zeta must be >= 0"));
            }
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("x0 must be finite"));
        }
        Ok(())
    }

    fn fine_step(&self) -> Result<f64> {
        let dt = self
            .fine_dt
            .ok_or_else(|| Error::arg("continuous-time simulation needs fine_dt"))?;
        if !(dt > 0.0 && dt <= 1e-2) {
            return Err(Error::arg(format!("fine_dt must lie in (0, 1e-2], got {dt}")));
        }
        Ok(dt)
    }
}

/// Ensemble statistics at one record time.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub mean: Vec<f64>,
    /// Row-major sample covariance (divisor `n − 1`, zero for one sample).
    pub covariance: Vec<f64>,
    /// Mean of `V` over the ensemble.
    pub mean_v: f64,
    /// Smallest value of `V` seen along any trajectory up to this time.
    pub min_v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub samples: EmpiricalMeasure,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub record_times: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
}

impl EnsembleResult {
    pub fn n_traj(&self) -> usize {
        self.snapshots.first().map_or(0, |s| s.samples.len())
    }

    pub fn terminal(&self) -> &Snapshot {
        self.snapshots.last().expect("ensemble has at least one record time")
    }
}

struct TrajectoryRecord {
    states: Vec<f64>,
    min_v: Vec<f64>,
}

/// Per-step coefficient evaluation with reusable buffers.
struct Stepper<'a> {
    spec: &'a SimSpec,
    d: usize,
    sigma: Vec<f64>,
    grad: Vec<f64>,
    ups: Vec<f64>,
    drift: Vec<f64>,
    scratch: Vec<f64>,
    noise: Vec<f64>,
    incr: Vec<f64>,
    constant_sigma: bool,
}

impl<'a> Stepper<'a> {
    fn new(spec: &'a SimSpec) -> Self {
        let d = spec.potential.dim();
        Self {
            spec,
            d,
            sigma: vec![0.0; d * d],
            grad: vec![0.0; d],
            ups: vec![0.0; d],
            drift: vec![0.0; d],
            scratch: vec![0.0; d],
            noise: vec![0.0; d],
            incr: vec![0.0; d],
            constant_sigma: spec.sigma.is_constant(),
        }
    }

    /// Fills `sigma` and `drift` (`b_a(x)`, or zero without drift) at `x` and
    /// returns `V(x)`.
    #[inline]
    fn coefficients(&mut self, a: f64, x: &[f64]) -> Result<f64> {
        let spec = self.spec;
        spec.sigma.sigma_into(x, &mut self.sigma);
        let v = spec.potential.value_and_gradient(x, &mut self.grad);
        if !spec.drift_enabled {
            self.drift.fill(0.0);
            return Ok(v);
        }
        let c = a * a * spec.correction.factor();
        if c != 0.0 && !self.constant_sigma {
            if !spec.sigma.closed_correction(x, &mut self.ups) {
                self.ups = correction_term(&spec.sigma, x, spec.fd_step)?;
            }
        } else {
            self.ups.fill(0.0);
        }
        combine_drift(&self.sigma, &self.grad, &self.ups, c, self.d, &mut self.scratch, &mut self.drift);
        Ok(v)
    }

    /// `out = x + h·(drift + noise) + a·σ·w`.
    #[inline]
    fn advance(&self, x: &[f64], h: f64, a: f64, w: &[f64], out: &mut [f64]) {
        let d = self.d;
        for i in 0..d {
            let mut diff = 0.0;
            for k in 0..d {
                diff += self.sigma[i * d + k] * w[k];
            }
            out[i] = x[i] + h * (self.drift[i] + self.noise[i]) + a * diff;
        }
    }
}

fn trajectory_rng(seed: u64, traj: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(traj as u64);
    rng
}

/// Bridge noise for one record time, independent of which other times are
/// recorded.
fn bridge_rng(seed: u64, traj: usize, time: f64) -> ChaCha8Rng {
    let key = time.to_bits().wrapping_mul(BRIDGE_STREAM_KEY).rotate_left(17);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ BRIDGE_STREAM_KEY ^ key);
    rng.set_stream(traj as u64);
    rng
}

#[inline]
fn check_state(x: &[f64], prev: &[f64], traj: usize, time: f64) -> Result<()> {
    let norm2 = x.iter().map(|v| v * v).sum::<f64>();
    if !(norm2 <= DIVERGENCE_NORM * DIVERGENCE_NORM) {
        return Err(Error::Divergence {
            trajectory: traj,
            time,
            norm: norm2.sqrt(),
            last_state: prev.to_vec(),
        });
    }
    Ok(())
}

/// Step sizes, grid times and levels shared by every trajectory of the
/// scheme, tabulated up to the first grid time past the last record.
struct EulerGrid {
    gamma: Vec<f64>,
    sqrt_gamma: Vec<f64>,
    /// `clock[n] = Γ_n`, accumulated in step order.
    clock: Vec<f64>,
    level: Vec<f64>,
}

const MAX_TABULATED_STEPS: usize = 1 << 26;

impl EulerGrid {
    fn new(spec: &SimSpec, steps: &StepSequence) -> Result<Self> {
        let last = *spec.record_times.last().expect("validated non-empty");
        let mut gamma = Vec::new();
        let mut clock = vec![0.0];
        let mut level = Vec::new();
        let mut t = 0.0f64;
        let mut n: u64 = 0;
        loop {
            level.push(spec.frozen_level.unwrap_or_else(|| spec.schedule.level(t)));
            let g = steps.gamma(n + 1);
            if !(g > 0.0) || !g.is_finite() {
                return Err(Error::arg(format!("step gamma_{} = {g} is not positive", n + 1)));
            }
            gamma.push(g);
            t += g;
            clock.push(t);
            n += 1;
            if t > last {
                break;
            }
            if gamma.len() >= MAX_TABULATED_STEPS {
                return Err(Error::arg(format!(
                    "the horizon needs more than {MAX_TABULATED_STEPS} steps; use larger steps"
                )));
            }
        }
        let sqrt_gamma = gamma.iter().map(|g| g.sqrt()).collect();
        Ok(Self {
            gamma,
            sqrt_gamma,
            clock,
            level,
        })
    }
}

fn euler_trajectory(spec: &SimSpec, grid: &EulerGrid, traj: usize) -> Result<TrajectoryRecord> {
    let d = spec.potential.dim();
    let n_rec = spec.record_times.len();
    let mut rng = trajectory_rng(spec.seed, traj);
    let mut st = Stepper::new(spec);
    let mut x = spec.x0.clone();
    let mut next_x = vec![0.0; d];
    let mut bridge = vec![0.0; d];
    let mut y = vec![0.0; d];
    let mut states = Vec::with_capacity(n_rec * d);
    let mut min_v_rec = Vec::with_capacity(n_rec);
    let mut running_min = f64::INFINITY;
    let c_zeta = match spec.noise {
        NoiseModel::GaussianScaled { c_zeta } if c_zeta > 0.0 => Some(c_zeta),
        _ => None,
    };
    let mut rec = 0;
    for n in 0..grid.gamma.len() {
        if rec == n_rec {
            break;
        }
        let gamma = grid.gamma[n];
        let clock = grid.clock[n];
        let next = grid.clock[n + 1];
        let a = grid.level[n];
        let v = st.coefficients(a, &x)?;
        running_min = running_min.min(v);
        match c_zeta {
            Some(c) => {
                let scale = c * v.max(0.0).sqrt();
                for z in st.noise.iter_mut() {
                    *z = scale * rng.sample::<f64, _>(StandardNormal);
                }
            }
            None => st.noise.fill(0.0),
        }
        let sd = grid.sqrt_gamma[n];
        for w in st.incr.iter_mut() {
            *w = sd * rng.sample::<f64, _>(StandardNormal);
        }
        while rec < n_rec && spec.record_times[rec] < next {
            let s = (spec.record_times[rec] - clock).max(0.0);
            // Brownian bridge: W_s given the full step increment.
            let frac = s / gamma;
            let spread = (s * (gamma - s) / gamma).max(0.0).sqrt();
            let mut bridge_rng = bridge_rng(spec.seed, traj, spec.record_times[rec]);
            for (b, w) in bridge.iter_mut().zip(&st.incr) {
                *b = frac * w + spread * bridge_rng.sample::<f64, _>(StandardNormal);
            }
            st.advance(&x, s, a, &bridge, &mut y);
            states.extend_from_slice(&y);
            min_v_rec.push(running_min.min(spec.potential.value(&y)));
            rec += 1;
        }
        st.advance(&x, gamma, a, &st.incr, &mut next_x);
        check_state(&next_x, &x, traj, next)?;
        std::mem::swap(&mut x, &mut next_x);
    }
    Ok(TrajectoryRecord {
        states,
        min_v: min_v_rec,
    })
}

/// Scalar specialization of [`euler_trajectory`] with the same arithmetic.
fn euler_trajectory_1d(spec: &SimSpec, grid: &EulerGrid, traj: usize) -> Result<TrajectoryRecord> {
    let n_rec = spec.record_times.len();
    let mut rng = trajectory_rng(spec.seed, traj);
    let pot = &spec.potential;
    let field = &spec.sigma;
    let constant_sigma = field.is_constant();
    let weight = spec.correction.factor();
    let c_zeta = match spec.noise {
        NoiseModel::GaussianScaled { c_zeta } if c_zeta > 0.0 => Some(c_zeta),
        _ => None,
    };
    let mut x = spec.x0[0];
    let mut states = Vec::with_capacity(n_rec);
    let mut min_v_rec = Vec::with_capacity(n_rec);
    let mut running_min = f64::INFINITY;
    let mut sig = [0.0];
    let mut grad = [0.0];
    let mut ups = [0.0];
    let mut rec = 0;
    for n in 0..grid.gamma.len() {
        if rec == n_rec {
            break;
        }
        let gamma = grid.gamma[n];
        let a = grid.level[n];
        let xs = [x];
        field.sigma_into(&xs, &mut sig);
        let s = sig[0];
        let v = pot.value_and_gradient(&xs, &mut grad);
        running_min = running_min.min(v);
        let drift = if spec.drift_enabled {
            let c = a * a * weight;
            let u = if c != 0.0 && !constant_sigma {
                if !field.closed_correction(&xs, &mut ups) {
                    ups[0] = correction_term(field, &xs, spec.fd_step)?[0];
                }
                ups[0]
            } else {
                0.0
            };
            -s * s * grad[0] + c * u
        } else {
            0.0
        };
        let zeta = match c_zeta {
            Some(c) => c * v.max(0.0).sqrt() * rng.sample::<f64, _>(StandardNormal),
            None => 0.0,
        };
        let w = grid.sqrt_gamma[n] * rng.sample::<f64, _>(StandardNormal);
        let next = grid.clock[n + 1];
        while rec < n_rec && spec.record_times[rec] < next {
            let clock = grid.clock[n];
            let h = (spec.record_times[rec] - clock).max(0.0);
            let frac = h / gamma;
            let spread = (h * (gamma - h) / gamma).max(0.0).sqrt();
            let mut bridge_rng = bridge_rng(spec.seed, traj, spec.record_times[rec]);
            let b = frac * w + spread * bridge_rng.sample::<f64, _>(StandardNormal);
            let y = x + h * (drift + zeta) + a * (s * b);
            states.push(y);
            min_v_rec.push(running_min.min(pot.value(&[y])));
            rec += 1;
        }
        let x_new = x + gamma * (drift + zeta) + a * (s * w);
        if !(x_new.abs() <= DIVERGENCE_NORM) {
            return Err(Error::Divergence {
                trajectory: traj,
                time: next,
                norm: x_new.abs(),
                last_state: vec![x],
            });
        }
        x = x_new;
    }
    Ok(TrajectoryRecord {
        states,
        min_v: min_v_rec,
    })
}

/// Levels at every micro-step `k·dt` up to the last record.
fn fine_levels<L: Fn(f64) -> f64>(spec: &SimSpec, dt: f64, level: L) -> Result<Vec<f64>> {
    let last = *spec.record_times.last().expect("validated non-empty");
    let n = (last / dt).round() as usize;
    if n > MAX_TABULATED_STEPS {
        return Err(Error::arg(format!(
            "the horizon needs more than {MAX_TABULATED_STEPS} micro-steps; use a larger fine_dt"
        )));
    }
    Ok((0..n)
        .map(|k| spec.frozen_level.unwrap_or_else(|| level(k as f64 * dt)))
        .collect())
}

fn fine_trajectory(spec: &SimSpec, dt: f64, levels: &[f64], traj: usize) -> Result<TrajectoryRecord> {
    let d = spec.potential.dim();
    let n_rec = spec.record_times.len();
    let mut rng = trajectory_rng(spec.seed, traj);
    let mut st = Stepper::new(spec);
    let rec_steps: Vec<usize> = spec.record_times.iter().map(|t| (t / dt).round() as usize).collect();
    let mut x = spec.x0.clone();
    let mut next_x = vec![0.0; d];
    let mut states = Vec::with_capacity(n_rec * d);
    let mut min_v_rec = Vec::with_capacity(n_rec);
    let mut running_min = f64::INFINITY;
    let sd = dt.sqrt();
    let mut rec = 0;
    let mut k = 0usize;
    loop {
        while rec < n_rec && rec_steps[rec] == k {
            states.extend_from_slice(&x);
            min_v_rec.push(running_min.min(spec.potential.value(&x)));
            rec += 1;
        }
        if rec == n_rec {
            break;
        }
        let a = levels[k];
        let v = st.coefficients(a, &x)?;
        running_min = running_min.min(v);
        for w in st.incr.iter_mut() {
            *w = sd * rng.sample::<f64, _>(StandardNormal);
        }
        st.advance(&x, dt, a, &st.incr, &mut next_x);
        check_state(&next_x, &x, traj, (k + 1) as f64 * dt)?;
        std::mem::swap(&mut x, &mut next_x);
        k += 1;
    }
    Ok(TrajectoryRecord {
        states,
        min_v: min_v_rec,
    })
}

/// Scalar specialization of [`fine_trajectory`] with the same arithmetic.
fn fine_trajectory_1d(spec: &SimSpec, dt: f64, levels: &[f64], traj: usize) -> Result<TrajectoryRecord> {
    let n_rec = spec.record_times.len();
    let mut rng = trajectory_rng(spec.seed, traj);
    let pot = &spec.potential;
    let field = &spec.sigma;
    let constant_sigma = field.is_constant();
    let weight = spec.correction.factor();
    let rec_steps: Vec<usize> = spec.record_times.iter().map(|t| (t / dt).round() as usize).collect();
    let mut x = spec.x0[0];
    let mut states = Vec::with_capacity(n_rec);
    let mut min_v_rec = Vec::with_capacity(n_rec);
    let mut running_min = f64::INFINITY;
    let mut sig = [0.0];
    let mut grad = [0.0];
    let mut ups = [0.0];
    let sd = dt.sqrt();
    let mut rec = 0;
    let mut k = 0usize;
    loop {
        while rec < n_rec && rec_steps[rec] == k {
            states.push(x);
            min_v_rec.push(running_min.min(pot.value(&[x])));
            rec += 1;
        }
        if rec == n_rec {
            break;
        }
        let a = levels[k];
        let xs = [x];
        field.sigma_into(&xs, &mut sig);
        let s = sig[0];
        let v = pot.value_and_gradient(&xs, &mut grad);
        running_min = running_min.min(v);
        let drift = if spec.drift_enabled {
            let c = a * a * weight;
            let u = if c != 0.0 && !constant_sigma {
                if !field.closed_correction(&xs, &mut ups) {
                    ups[0] = correction_term(field, &xs, spec.fd_step)?[0];
                }
                ups[0]
            } else {
                0.0
            };
            -s * s * grad[0] + c * u
        } else {
            0.0
        };
        let w = sd * rng.sample::<f64, _>(StandardNormal);
        let x_new = x + dt * drift + a * (s * w);
        if !(x_new.abs() <= DIVERGENCE_NORM) {
            return Err(Error::Divergence {
                trajectory: traj,
                time: (k + 1) as f64 * dt,
                norm: x_new.abs(),
                last_state: vec![x],
            });
        }
        x = x_new;
        k += 1;
    }
    Ok(TrajectoryRecord {
        states,
        min_v: min_v_rec,
    })
}

fn run_fine(spec: &SimSpec, n_traj: usize, dt: f64, levels: Vec<f64>) -> Result<EnsembleResult> {
    let times = snapped_times(spec, dt);
    if spec.potential.dim() == 1 {
        run_ensemble(spec, n_traj, times, |traj| fine_trajectory_1d(spec, dt, &levels, traj))
    } else {
        run_ensemble(spec, n_traj, times, |traj| fine_trajectory(spec, dt, &levels, traj))
    }
}

fn run_ensemble<F>(spec: &SimSpec, n_traj: usize, record_times: Vec<f64>, kernel: F) -> Result<EnsembleResult>
where
    F: Fn(usize) -> Result<TrajectoryRecord> + Sync,
{
    let records: Vec<Result<TrajectoryRecord>> = (0..n_traj).into_par_iter().map(&kernel).collect();
    let mut trajs = Vec::with_capacity(n_traj);
    for r in records {
        trajs.push(r?);
    }
    let d = spec.potential.dim();
    let mut snapshots = Vec::with_capacity(record_times.len());
    for (r, &time) in record_times.iter().enumerate() {
        let mut samples = Vec::with_capacity(n_traj * d);
        let mut min_v = f64::INFINITY;
        for t in &trajs {
            samples.extend_from_slice(&t.states[r * d..(r + 1) * d]);
            min_v = min_v.min(t.min_v[r]);
        }
        let samples = EmpiricalMeasure::new(d, samples)?;
        let summary = summarize(&spec.potential, &samples, min_v);
        snapshots.push(Snapshot { time, samples, summary });
    }
    Ok(EnsembleResult {
        record_times,
        snapshots,
    })
}

fn summarize(pot: &Potential, samples: &EmpiricalMeasure, min_v: f64) -> Summary {
    let d = samples.dim();
    let n = samples.len();
    let mut mean = vec![0.0; d];
    let mut mean_v = 0.0;
    for row in samples.rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
        mean_v += pot.value(row);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    mean_v /= n as f64;
    let mut covariance = vec![0.0; d * d];
    if n > 1 {
        for row in samples.rows() {
            for i in 0..d {
                for j in 0..d {
                    covariance[i * d + j] += (row[i] - mean[i]) * (row[j] - mean[j]);
                }
            }
        }
        covariance.iter_mut().for_each(|c| *c /= (n - 1) as f64);
    }
    Summary {
        mean,
        covariance,
        mean_v,
        min_v,
    }
}

/// Runs `n_traj` independent copies of the decreasing-step Euler scheme and
/// records them at `spec.record_times` (off-grid times use the genuine
/// interpolation with a Brownian-bridge split of the step increment).
pub fn simulate_euler_scheme(spec: &SimSpec, n_traj: usize) -> Result<EnsembleResult> {
    spec.validate(n_traj)?;
    let steps = spec
        .steps
        .as_ref()
        .ok_or_else(|| Error::arg("the Euler scheme needs a step sequence"))?;
    let grid = EulerGrid::new(spec, steps)?;
    if spec.potential.dim() == 1 {
        run_ensemble(spec, n_traj, spec.record_times.clone(), |traj| euler_trajectory_1d(spec, &grid, traj))
    } else {
        run_ensemble(spec, n_traj, spec.record_times.clone(), |traj| euler_trajectory(spec, &grid, traj))
    }
}

fn snapped_times(spec: &SimSpec, dt: f64) -> Vec<f64> {
    spec.record_times.iter().map(|t| (t / dt).round() * dt).collect()
}

/// Micro-step Euler discretization of `dY = b_{a(t)}(Y)dt + a(t)σ(Y)dW`.
/// Record times are snapped to the micro-grid.
pub fn simulate_continuous(spec: &SimSpec, n_traj: usize) -> Result<EnsembleResult> {
    spec.validate(n_traj)?;
    let dt = spec.fine_step()?;
    let schedule = spec.schedule;
    let levels = fine_levels(spec, dt, |t| schedule.level(t))?;
    run_fine(spec, n_traj, dt, levels)
}

/// Micro-step discretization of the plateau process: on `[T_k, T_{k+1})` the
/// level is frozen at `a_{k+1} = a(T_{k+1})`.
pub fn simulate_plateau(spec: &SimSpec, n_traj: usize) -> Result<EnsembleResult> {
    spec.validate(n_traj)?;
    let dt = spec.fine_step()?;
    let plateau = spec
        .plateau
        .ok_or_else(|| Error::arg("the plateau process needs a plateau schedule"))?;
    let schedule = spec.schedule;
    let levels = fine_levels(spec, dt, |t| schedule.level(plateau.time(plateau.index_at(t) + 1)))?;
    run_fine(spec, n_traj, dt, levels)
}

/// The level function `u` of a driftless time-changed martingale.
#[derive(Clone)]
pub enum TimeScale {
    Constant(f64),
    Schedule(AnnealSchedule),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for TimeScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeScale::Constant(c) => write!(f, "Constant({c})"),
            TimeScale::Schedule(s) => write!(f, "Schedule({s:?})"),
            TimeScale::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl TimeScale {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeScale::Constant(c) => *c,
            TimeScale::Schedule(s) => s.level(t),
            TimeScale::Custom(f) => f(t),
        }
    }
}

/// `F^{(-1)}(t) = ∫_0^t u(s)² ds`, the clock on which `dZ = u(t)σ(Z)dW`
/// matches the unit-level martingale `dM = σ(M)dW` in law.
pub fn time_change_inverse(u: &TimeScale, t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::arg(format!("time must be finite and >= 0, got {t}")));
    }
    if let TimeScale::Constant(c) = u {
        if !(*c > 0.0) {
            return Err(Error::arg(format!("time scale must be positive, got {c}")));
        }
        return Ok(c * c * t);
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let mut bad = None;
    let r = integrate(
        |s| {
            let v = u.eval(s);
            if !(v > 0.0) && bad.is_none() {
                bad = Some((s, v));
            }
            v * v
        },
        0.0,
        t,
        &QuadOptions::with_tol(1e-14, 1e-13),
    )?;
    if let Some((s, v)) = bad {
        return Err(Error::arg(format!("time scale is not positive at s = {s}: u = {v}")));
    }
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad_spec() -> SimSpec {
        SimSpec::new(
            Potential::quadratic(1, 1.0).unwrap(),
            DiffusionField::scalar(1, 1.0).unwrap(),
            AnnealSchedule::new(1.0).unwrap(),
            vec![2.0],
            10.0,
        )
    }

    #[test]
    fn noise_free_scheme_contracts() {
        let spec = quad_spec()
            .frozen(0.0)
            .with_steps(StepSequence::power(0.1, 0.6).unwrap())
            .with_record_times(vec![0.0, 5.0, 10.0]);
        let r = simulate_euler_scheme(&spec, 3).unwrap();
        assert_eq!(r.snapshots[0].samples.row(0), &[2.0]);
        let term = r.terminal();
        assert!(term.samples.rows().all(|x| x[0].abs() < 0.1));
        // deterministic: identical across trajectories
        assert_eq!(term.samples.row(0), term.samples.row(2));
    }

    #[test]
    fn continuous_matches_exponential_decay() {
        let spec = quad_spec()
            .frozen(0.0)
            .with_fine_dt(1e-3)
            .with_record_times(vec![1.0]);
        let spec = SimSpec { x0: vec![1.0], ..spec };
        let r = simulate_continuous(&spec, 1).unwrap();
        assert!((r.terminal().samples.row(0)[0] - (-1.0f64).exp()).abs() < 5e-3);
    }

    #[test]
    fn seeded_runs_are_bitwise_identical() {
        let spec = quad_spec()
            .with_steps(StepSequence::power(0.05, 0.7).unwrap())
            .with_noise(NoiseModel::GaussianScaled { c_zeta: 0.3 })
            .with_seed(7)
            .with_record_times(vec![0.37, 2.0, 10.0]);
        let a = simulate_euler_scheme(&spec, 64).unwrap();
        let b = simulate_euler_scheme(&spec, 64).unwrap();
        assert_eq!(a, b);
        let c = simulate_euler_scheme(&spec.clone().with_seed(8), 64).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn recording_does_not_perturb_the_path() {
        let base = quad_spec()
            .with_steps(StepSequence::power(0.05, 0.7).unwrap())
            .with_seed(3);
        let few = simulate_euler_scheme(&base.clone().with_record_times(vec![10.0]), 8).unwrap();
        let many = simulate_euler_scheme(&base.with_record_times(vec![0.5, 1.234, 3.0, 7.77, 10.0]), 8).unwrap();
        assert_eq!(few.terminal().samples, many.terminal().samples);
    }

    #[test]
    fn plateau_equals_continuous_when_frozen() {
        let spec = quad_spec()
            .frozen(0.7)
            .with_fine_dt(1e-3)
            .with_plateau(PlateauSchedule::new(5.0, 1.0).unwrap())
            .with_seed(11)
            .with_record_times(vec![1.0, 2.5, 4.0]);
        let spec = SimSpec { horizon: 4.0, ..spec };
        let p = simulate_plateau(&spec, 16).unwrap();
        let c = simulate_continuous(&spec, 16).unwrap();
        assert_eq!(p, c);
    }

    #[test]
    fn plateau_level_is_piecewise_constant() {
        // Driftless with σ = 1: Var(X_t) = Σ a_{k+1}² |[T_k, T_{k+1}) ∩ [0, t]|.
        let spec = quad_spec()
            .without_drift()
            .with_fine_dt(1e-3)
            .with_plateau(PlateauSchedule::new(1.0, 1.0).unwrap())
            .with_record_times(vec![4.0]);
        let spec = SimSpec { x0: vec![0.0], horizon: 4.0, ..spec };
        let r = simulate_plateau(&spec, 4000).unwrap();
        let s = AnnealSchedule::new(1.0).unwrap();
        let expected: f64 = [(0.0, 1.0, 1u64), (1.0, 4.0, 2)]
            .iter()
            .map(|&(lo, hi, k)| s.level((k * k) as f64).powi(2) * (hi - lo))
            .sum();
        let var = r.terminal().summary.covariance[0];
        assert!((var / expected - 1.0).abs() < 0.08, "{var} vs {expected}");
    }

    #[test]
    fn scalar_kernels_match_generic_ones() {
        let spec = SimSpec::new(
            crate::problem::builtin_double_well(1, 1.0, 1.0, 4.0).unwrap(),
            DiffusionField::sin_diagonal(1, 2.0, 0.5).unwrap(),
            AnnealSchedule::new(1.5).unwrap(),
            vec![0.7],
            3.0,
        )
        .with_steps(StepSequence::power(0.01, 0.6).unwrap())
        .with_fine_dt(1e-3)
        .with_noise(NoiseModel::GaussianScaled { c_zeta: 0.2 })
        .with_seed(5)
        .with_record_times(vec![0.25, 1.0, 3.0]);
        let grid = EulerGrid::new(&spec, spec.steps.as_ref().unwrap()).unwrap();
        let levels = fine_levels(&spec, 1e-3, |t| spec.schedule.level(t)).unwrap();
        for traj in 0..4 {
            let a = euler_trajectory(&spec, &grid, traj).unwrap();
            let b = euler_trajectory_1d(&spec, &grid, traj).unwrap();
            for (x, y) in a.states.iter().zip(&b.states) {
                assert!((x - y).abs() < 1e-12, "{x} {y}");
            }
            let a = fine_trajectory(&spec, 1e-3, &levels, traj).unwrap();
            let b = fine_trajectory_1d(&spec, 1e-3, &levels, traj).unwrap();
            for (x, y) in a.states.iter().zip(&b.states) {
                assert!((x - y).abs() < 1e-12, "{x} {y}");
            }
            assert_eq!(a.min_v, b.min_v);
        }
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let spec = quad_spec()
            .with_steps(StepSequence::power(0.05, 0.7).unwrap())
            .with_noise(NoiseModel::GaussianScaled { c_zeta: 0.3 })
            .with_seed(99)
            .with_record_times(vec![1.0, 10.0]);
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate_euler_scheme(&spec, 100).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn divergence_is_reported() {
        // Steps far too large for the curvature: the scheme explodes.
        let spec = SimSpec::new(
            Potential::quadratic(1, 50.0).unwrap(),
            DiffusionField::scalar(1, 1.0).unwrap(),
            AnnealSchedule::new(1.0).unwrap(),
            vec![1.0],
            50.0,
        )
        .with_steps(StepSequence::power(1.0, 0.51).unwrap());
        match simulate_euler_scheme(&spec, 2) {
            Err(Error::Divergence { trajectory, .. }) => assert_eq!(trajectory, 0),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let spec = quad_spec();
        assert!(simulate_euler_scheme(&spec, 4).is_err()); // no steps
        assert!(simulate_continuous(&spec.clone().with_fine_dt(0.1), 4).is_err());
        let spec = spec.with_fine_dt(1e-3);
        assert!(simulate_plateau(&spec, 4).is_err()); // no plateau
        assert!(simulate_continuous(&spec.clone().with_record_times(vec![]), 4).is_err());
        assert!(simulate_continuous(&spec.clone().with_record_times(vec![11.0]), 4).is_err());
        assert!(simulate_continuous(&spec, 0).is_err());
    }

    #[test]
    fn time_change_constant_and_schedule() {
        assert_eq!(time_change_inverse(&TimeScale::Constant(0.5), 4.0).unwrap(), 1.0);
        assert!(time_change_inverse(&TimeScale::Constant(0.0), 1.0).is_err());
        assert!(time_change_inverse(&TimeScale::Custom(Arc::new(|t| 1.0 - t)), 2.0).is_err());
        // Midpoint Riemann oracle with step 1e-6 for ∫_0^t ds / log(s + e).
        let t = std::f64::consts::E - 1.0;
        let n = (t / 1e-6).ceil() as usize;
        let h = t / n as f64;
        let riemann: f64 = (0..n)
            .map(|k| h / ((k as f64 + 0.5) * h + std::f64::consts::E).ln())
            .sum();
        let s = TimeScale::Schedule(AnnealSchedule::new(1.0).unwrap());
        let v = time_change_inverse(&s, t).unwrap();
        assert!((v - riemann).abs() < 1e-8, "{v} {riemann}");
        let mut prev = 0.0;
        for k in 1..50 {
            let cur = time_change_inverse(&s, k as f64 * 0.37).unwrap();
            assert!(cur > prev);
            prev = cur;
        }
    }
}
