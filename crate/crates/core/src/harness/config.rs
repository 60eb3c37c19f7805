//! Key-value experiment configuration.
//!
//! One `key = value` pair per line; `#` starts a comment. Every key has a
//! default, and [`ExperimentConfig::echo`] writes all of them back in a fixed
//! order, so an echo file parses to the same configuration.

use std::env;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::dynamics::NoiseModel;
use crate::error::{Error, Result};
use crate::metrics::{Bandwidth, ReferenceSmoothing, TvOptions};
use crate::problem::{CorrectionWeight, DiffusionField, Potential};
use crate::schedules::{AnnealSchedule, PlateauSchedule, StepSequence};

/// Environment variable holding the default output root.
pub const OUTPUT_ROOT_ENV: &str = "LSA_OUTPUT_ROOT";
/// Output root used when [`OUTPUT_ROOT_ENV`] is unset.
pub const DEFAULT_OUTPUT_ROOT: &str = "lsa-runs";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    Quadratic,
    DoubleWell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaKind {
    Scalar,
    SinDiagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Decreasing-step Euler scheme.
    Euler,
    /// Fine-step continuous-time process.
    Continuous,
    /// Fine-step plateau process.
    Plateau,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RecordSpec {
    /// `t0 · 2^k` below the horizon, then the horizon itself.
    Geometric,
    List(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,

    pub potential: PotentialKind,
    pub dim: usize,
    pub curvature: f64,
    pub well_sep: f64,
    pub hess_left: f64,
    pub hess_right: f64,

    pub sigma: SigmaKind,
    pub sigma_scale: f64,
    pub sigma_base: f64,
    pub sigma_amp: f64,
    pub correction: CorrectionWeight,

    pub amplitude: f64,
    pub gamma1: f64,
    pub eta: f64,
    pub c_t: f64,
    pub beta: f64,
    pub frozen_a: Option<f64>,

    pub c_zeta: f64,

    pub scheme: Scheme,
    pub drift: bool,
    pub x0: Vec<f64>,
    pub horizon: f64,
    pub fine_dt: f64,
    pub n_traj: usize,
    pub record_t0: f64,
    pub record: RecordSpec,

    pub bandwidth: Bandwidth,
    pub bootstrap: usize,
    pub reference: ReferenceSmoothing,
    pub tol: f64,
    pub w1_slices: usize,

    pub compare_eta: f64,

    pub sweep_n_min: u64,
    pub sweep_n_max: u64,

    pub audit_half_width: f64,
    pub audit_points: usize,
    pub audit_pairs: usize,
    pub audit_r0: f64,
    pub audit_alpha0: f64,

    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "default".into(),
            seed: 1,
            potential: PotentialKind::DoubleWell,
            dim: 1,
            curvature: 1.0,
            well_sep: 1.0,
            hess_left: 1.0,
            hess_right: 4.0,
            sigma: SigmaKind::Scalar,
            sigma_scale: 1.0,
            sigma_base: 2.0,
            sigma_amp: 1.0,
            correction: CorrectionWeight::Unit,
            amplitude: 2.0,
            gamma1: 0.5,
            eta: 0.6,
            c_t: 1.0,
            beta: 1.0,
            frozen_a: None,
            c_zeta: 0.0,
            scheme: Scheme::Euler,
            drift: true,
            x0: vec![1.0],
            horizon: 100.0,
            fine_dt: 1e-3,
            n_traj: 2000,
            record_t0: 1.0,
            record: RecordSpec::Geometric,
            bandwidth: Bandwidth::Auto,
            bootstrap: 50,
            reference: ReferenceSmoothing::Matched,
            tol: 1e-9,
            w1_slices: 64,
            compare_eta: 0.6,
            sweep_n_min: 10,
            sweep_n_max: 1000,
            audit_half_width: 10.0,
            audit_points: 10_000,
            audit_pairs: 10_000,
            audit_r0: 3.0,
            audit_alpha0: 0.01,
            output_dir: None,
        }
    }
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| cfg_err(format!("{key}: cannot parse {v:?} as a number")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| num(key, s.trim())).collect()
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn flag(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        _ => Err(cfg_err(format!("{key}: expected true or false, got {v:?}"))),
    }
}

/// Parses `key=value`.
pub fn parse_assignment(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| cfg_err(format!("expected key=value, got {s:?}")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

impl ExperimentConfig {
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = parse_assignment(line).map_err(|e| cfg_err(format!("line {}: {e}", lineno + 1)))?;
            cfg.set(&k, &v).map_err(|e| cfg_err(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_str(&text)
    }

    /// Applies one override. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "name" => {
                if v.is_empty() || v.contains(['/', '\\']) {
                    return Err(cfg_err(format!("name: {v:?} is not a plain directory name")));
                }
                self.name = v.to_string()
            }
            "seed" => self.seed = num(key, v)?,
            "potential" => {
                self.potential = match v {
                    "quadratic" => PotentialKind::Quadratic,
                    "double_well" => PotentialKind::DoubleWell,
                    _ => return Err(cfg_err(format!("potential: unknown builtin {v:?} (quadratic, double_well)"))),
                }
            }
            "potential.dim" => self.dim = num(key, v)?,
            "potential.curvature" => self.curvature = num(key, v)?,
            "potential.well_sep" => self.well_sep = num(key, v)?,
            "potential.hess_left" => self.hess_left = num(key, v)?,
            "potential.hess_right" => self.hess_right = num(key, v)?,
            "sigma" => {
                self.sigma = match v {
                    "scalar" => SigmaKind::Scalar,
                    "sin_diagonal" => SigmaKind::SinDiagonal,
                    _ => return Err(cfg_err(format!("sigma: unknown builtin {v:?} (scalar, sin_diagonal)"))),
                }
            }
            "sigma.scale" => self.sigma_scale = num(key, v)?,
            "sigma.base" => self.sigma_base = num(key, v)?,
            "sigma.amp" => self.sigma_amp = num(key, v)?,
            "correction" => {
                self.correction = match v {
                    "unit" => CorrectionWeight::Unit,
                    "half" => CorrectionWeight::Half,
                    _ => return Err(cfg_err(format!("correction: expected unit or half, got {v:?}"))),
                }
            }
            "A" => self.amplitude = num(key, v)?,
            "gamma1" => self.gamma1 = num(key, v)?,
            "eta" => self.eta = num(key, v)?,
            "c_T" => self.c_t = num(key, v)?,
            "beta" => self.beta = num(key, v)?,
            "frozen_a" => self.frozen_a = if v == "none" { None } else { Some(num(key, v)?) },
            "noise.c_zeta" => self.c_zeta = num(key, v)?,
            "sim.scheme" => {
                self.scheme = match v {
                    "euler" => Scheme::Euler,
                    "continuous" => Scheme::Continuous,
                    "plateau" => Scheme::Plateau,
                    _ => return Err(cfg_err(format!("sim.scheme: expected euler, continuous or plateau, got {v:?}"))),
                }
            }
            "sim.drift" => self.drift = flag(key, v)?,
            "sim.x0" => self.x0 = list(key, v)?,
            "sim.horizon" => self.horizon = num(key, v)?,
            "sim.fine_dt" => self.fine_dt = num(key, v)?,
            "sim.n_traj" => self.n_traj = num(key, v)?,
            "record.t0" => self.record_t0 = num(key, v)?,
            "record.times" => {
                self.record = match v {
                    "geometric" => RecordSpec::Geometric,
                    "" => RecordSpec::List(Vec::new()),
                    _ => RecordSpec::List(list(key, v)?),
                }
            }
            "metric.bandwidth" => {
                self.bandwidth = if v == "auto" {
                    Bandwidth::Auto
                } else if let Some(s) = v.strip_prefix("scaled:") {
                    Bandwidth::Scaled(num(key, s)?)
                } else if let Some(s) = v.strip_prefix("fixed:") {
                    Bandwidth::Fixed(num(key, s)?)
                } else {
                    return Err(cfg_err(format!("metric.bandwidth: expected auto, scaled:<f> or fixed:<h>, got {v:?}")));
                }
            }
            "metric.bootstrap" => self.bootstrap = num(key, v)?,
            "metric.reference" => {
                self.reference = match v {
                    "matched" => ReferenceSmoothing::Matched,
                    "exact" => ReferenceSmoothing::Exact,
                    _ => return Err(cfg_err(format!("metric.reference: expected matched or exact, got {v:?}"))),
                }
            }
            "metric.tol" => self.tol = num(key, v)?,
            "metric.w1_slices" => self.w1_slices = num(key, v)?,
            "compare.eta" => self.compare_eta = num(key, v)?,
            "sweep.n_min" => self.sweep_n_min = num(key, v)?,
            "sweep.n_max" => self.sweep_n_max = num(key, v)?,
            "audit.half_width" => self.audit_half_width = num(key, v)?,
            "audit.points" => self.audit_points = num(key, v)?,
            "audit.pairs" => self.audit_pairs = num(key, v)?,
            "audit.r0" => self.audit_r0 = num(key, v)?,
            "audit.alpha0" => self.audit_alpha0 = num(key, v)?,
            "output.dir" => self.output_dir = if v == "auto" { None } else { Some(PathBuf::from(v)) },
            _ => return Err(cfg_err(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Every key with its effective value, in a fixed order.
    pub fn echo(&self) -> String {
        let potential = match self.potential {
            PotentialKind::Quadratic => "quadratic",
            PotentialKind::DoubleWell => "double_well",
        };
        let sigma = match self.sigma {
            SigmaKind::Scalar => "scalar",
            SigmaKind::SinDiagonal => "sin_diagonal",
        };
        let correction = match self.correction {
            CorrectionWeight::Unit => "unit",
            CorrectionWeight::Half => "half",
        };
        let scheme = match self.scheme {
            Scheme::Euler => "euler",
            Scheme::Continuous => "continuous",
            Scheme::Plateau => "plateau",
        };
        let record = match &self.record {
            RecordSpec::Geometric => "geometric".to_string(),
            RecordSpec::List(ts) => join(ts),
        };
        let bandwidth = match self.bandwidth {
            Bandwidth::Auto => "auto".to_string(),
            Bandwidth::Scaled(s) => format!("scaled:{s}"),
            Bandwidth::Fixed(h) => format!("fixed:{h}"),
        };
        let reference = match self.reference {
            ReferenceSmoothing::Matched => "matched",
            ReferenceSmoothing::Exact => "exact",
        };
        let frozen = self.frozen_a.map_or_else(|| "none".to_string(), |a| a.to_string());
        let out = self
            .output_dir
            .as_ref()
            .map_or_else(|| "auto".to_string(), |p| p.display().to_string());

        let pairs: Vec<(&str, String)> = vec![
            ("name", self.name.clone()),
            ("seed", self.seed.to_string()),
            ("potential", potential.into()),
            ("potential.dim", self.dim.to_string()),
            ("potential.curvature", self.curvature.to_string()),
            ("potential.well_sep", self.well_sep.to_string()),
            ("potential.hess_left", self.hess_left.to_string()),
            ("potential.hess_right", self.hess_right.to_string()),
            ("sigma", sigma.into()),
            ("sigma.scale", self.sigma_scale.to_string()),
            ("sigma.base", self.sigma_base.to_string()),
            ("sigma.amp", self.sigma_amp.to_string()),
            ("correction", correction.into()),
            ("A", self.amplitude.to_string()),
            ("gamma1", self.gamma1.to_string()),
            ("eta", self.eta.to_string()),
            ("c_T", self.c_t.to_string()),
            ("beta", self.beta.to_string()),
            ("frozen_a", frozen),
            ("noise.c_zeta", self.c_zeta.to_string()),
            ("sim.scheme", scheme.into()),
            ("sim.drift", self.drift.to_string()),
            ("sim.x0", join(&self.x0)),
            ("sim.horizon", self.horizon.to_string()),
            ("sim.fine_dt", self.fine_dt.to_string()),
            ("sim.n_traj", self.n_traj.to_string()),
            ("record.t0", self.record_t0.to_string()),
            ("record.times", record),
            ("metric.bandwidth", bandwidth),
            ("metric.bootstrap", self.bootstrap.to_string()),
            ("metric.reference", reference.into()),
            ("metric.tol", self.tol.to_string()),
            ("metric.w1_slices", self.w1_slices.to_string()),
            ("compare.eta", self.compare_eta.to_string()),
            ("sweep.n_min", self.sweep_n_min.to_string()),
            ("sweep.n_max", self.sweep_n_max.to_string()),
            ("audit.half_width", self.audit_half_width.to_string()),
            ("audit.points", self.audit_points.to_string()),
            ("audit.pairs", self.audit_pairs.to_string()),
            ("audit.r0", self.audit_r0.to_string()),
            ("audit.alpha0", self.audit_alpha0.to_string()),
            ("output.dir", out),
        ];
        let mut s = String::new();
        for (k, v) in pairs {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(cfg_err(format!("{key} must be positive and finite, got {v}")))
            }
        };
        if !(1..=3).contains(&self.dim) {
            return Err(cfg_err(format!("potential.dim must be 1, 2 or 3, got {}", self.dim)));
        }
        positive("potential.curvature", self.curvature)?;
        positive("potential.well_sep", self.well_sep)?;
        positive("potential.hess_left", self.hess_left)?;
        positive("potential.hess_right", self.hess_right)?;
        positive("sigma.scale", self.sigma_scale)?;
        positive("sigma.base", self.sigma_base)?;
        if self.sigma == SigmaKind::SinDiagonal && !(self.sigma_amp.abs() < self.sigma_base) {
            return Err(cfg_err("sigma.amp must be smaller than sigma.base in absolute value"));
        }
        positive("A", self.amplitude)?;
        positive("gamma1", self.gamma1)?;
        if !(self.eta > 0.5 && self.eta <= 1.0) {
            return Err(cfg_err(format!("eta must lie in (1/2, 1], got {}", self.eta)));
        }
        positive("c_T", self.c_t)?;
        positive("beta", self.beta)?;
        if let Some(a) = self.frozen_a {
            positive("frozen_a", a)?;
        }
        if !(self.c_zeta >= 0.0 && self.c_zeta.is_finite()) {
            return Err(cfg_err(format!("noise.c_zeta must be non-negative, got {}", self.c_zeta)));
        }
        if self.x0.len() != self.dim || self.x0.iter().any(|x| !x.is_finite()) {
            return Err(cfg_err(format!(
                "sim.x0 must list {} finite coordinates, got {:?}",
                self.dim, self.x0
            )));
        }
        positive("sim.horizon", self.horizon)?;
        if !(self.fine_dt > 0.0 && self.fine_dt <= 1e-2) {
            return Err(cfg_err(format!("sim.fine_dt must lie in (0, 1e-2], got {}", self.fine_dt)));
        }
        if self.n_traj == 0 {
            return Err(cfg_err("sim.n_traj must be at least 1"));
        }
        positive("record.t0", self.record_t0)?;
        if let RecordSpec::List(ts) = &self.record {
            if ts.is_empty() {
                return Err(cfg_err("record.times is empty"));
            }
            if ts.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(cfg_err("record.times must be strictly increasing"));
            }
            if ts.iter().any(|&t| !(t > 0.0 && t <= self.horizon)) {
                return Err(cfg_err("record.times must lie in (0, sim.horizon]"));
            }
        }
        match self.bandwidth {
            Bandwidth::Auto => {}
            Bandwidth::Scaled(s) => positive("metric.bandwidth", s)?,
            Bandwidth::Fixed(h) => positive("metric.bandwidth", h)?,
        }
        positive("metric.tol", self.tol)?;
        if self.w1_slices == 0 {
            return Err(cfg_err("metric.w1_slices must be at least 1"));
        }
        if !(self.compare_eta > 0.5 && self.compare_eta < 1.0) {
            return Err(cfg_err(format!("compare.eta must lie in (1/2, 1), got {}", self.compare_eta)));
        }
        if !(2 <= self.sweep_n_min && self.sweep_n_min <= self.sweep_n_max) {
            return Err(cfg_err("sweep needs 2 <= sweep.n_min <= sweep.n_max"));
        }
        positive("audit.half_width", self.audit_half_width)?;
        if self.audit_points == 0 {
            return Err(cfg_err("audit.points must be at least 1"));
        }
        if !(self.audit_r0 >= 0.0) {
            return Err(cfg_err("audit.r0 must be non-negative"));
        }
        Ok(())
    }

    /// Record times: the explicit list, or `t0 · 2^k` below the horizon
    /// followed by the horizon.
    pub fn record_times(&self) -> Vec<f64> {
        match &self.record {
            RecordSpec::List(ts) => ts.clone(),
            RecordSpec::Geometric => {
                let mut ts = Vec::new();
                let mut t = self.record_t0;
                while t < self.horizon {
                    ts.push(t);
                    t *= 2.0;
                }
                ts.push(self.horizon);
                ts
            }
        }
    }

    /// The output directory, falling back to `$LSA_OUTPUT_ROOT/<name>`.
    pub fn run_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| {
            let root = env::var_os(OUTPUT_ROOT_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT));
            root.join(&self.name)
        })
    }

    /// Copy with the output directory made explicit.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.output_dir = Some(self.run_dir());
        c
    }

    pub fn build_potential(&self) -> Result<Potential> {
        let pot = match self.potential {
            PotentialKind::Quadratic => Potential::quadratic(self.dim, self.curvature),
            PotentialKind::DoubleWell => Potential::double_well(self.dim, self.well_sep, self.hess_left, self.hess_right),
        };
        pot.map_err(as_config)
    }

    pub fn build_sigma(&self) -> Result<DiffusionField> {
        let s = match self.sigma {
            SigmaKind::Scalar => DiffusionField::scalar(self.dim, self.sigma_scale),
            SigmaKind::SinDiagonal => DiffusionField::sin_diagonal(self.dim, self.sigma_base, self.sigma_amp),
        };
        s.map_err(as_config)
    }

    pub fn anneal_schedule(&self) -> Result<AnnealSchedule> {
        AnnealSchedule::new(self.amplitude).map_err(as_config)
    }

    pub fn step_sequence(&self) -> Result<StepSequence> {
        StepSequence::power(self.gamma1, self.eta).map_err(as_config)
    }

    pub fn plateau_schedule(&self) -> Result<PlateauSchedule> {
        PlateauSchedule::new(self.c_t, self.beta).map_err(as_config)
    }

    pub fn noise(&self) -> NoiseModel {
        if self.c_zeta > 0.0 {
            NoiseModel::GaussianScaled { c_zeta: self.c_zeta }
        } else {
            NoiseModel::None
        }
    }

    pub fn tv_options(&self) -> TvOptions {
        TvOptions {
            bandwidth: self.bandwidth,
            bootstrap: self.bootstrap,
            seed: self.seed,
            reference: self.reference,
            ..TvOptions::default()
        }
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Argument(m) => Error::Config(m),
        other => other,
    }
}
