use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{ExperimentConfig, Scheme};
use super::Table;
use crate::dynamics::{simulate_continuous, simulate_euler_scheme, simulate_plateau, EnsembleResult, SimSpec, Snapshot};
use crate::error::{Error, Result};
use crate::gibbs::{sample_from, GibbsMeasure, GibbsOptions};
use crate::metrics::{tv_empirical_vs_density, w1_1d, w1_sliced};

/// Header of `trace.csv`.
pub const TRACE_COLUMNS: [&str; 7] = ["t", "a_t", "tv", "tv_se", "w1", "mean_V", "min_V"];

/// Diagnostic file written into the run directory when a run fails.
pub const FAILURE_FILE: &str = "failure.txt";

#[derive(Debug, Clone)]
pub struct RunReport {
    pub dir: PathBuf,
    pub trace: Table,
    pub ensemble: EnsembleResult,
}

fn mix(seed: u64, k: u64) -> u64 {
    let mut z = seed ^ k.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// The level the simulated process uses at time `t`.
pub fn level_at(cfg: &ExperimentConfig, t: f64) -> Result<f64> {
    if let Some(a) = cfg.frozen_a {
        return Ok(a);
    }
    let s = cfg.anneal_schedule()?;
    Ok(match cfg.scheme {
        Scheme::Plateau => {
            let p = cfg.plateau_schedule()?;
            s.level(p.time(p.index_at(t) + 1))
        }
        Scheme::Euler | Scheme::Continuous => s.level(t),
    })
}

/// The simulator input described by `cfg`.
pub fn sim_spec(cfg: &ExperimentConfig) -> Result<SimSpec> {
    let mut spec = SimSpec::new(
        cfg.build_potential()?,
        cfg.build_sigma()?,
        cfg.anneal_schedule()?,
        cfg.x0.clone(),
        cfg.horizon,
    )
    .with_seed(cfg.seed)
    .with_record_times(cfg.record_times())
    .with_noise(cfg.noise())
    .with_correction(cfg.correction);
    spec = match cfg.scheme {
        Scheme::Euler => spec.with_steps(cfg.step_sequence()?),
        Scheme::Continuous => spec.with_fine_dt(cfg.fine_dt),
        Scheme::Plateau => spec.with_fine_dt(cfg.fine_dt).with_plateau(cfg.plateau_schedule()?),
    };
    if let Some(a) = cfg.frozen_a {
        spec = spec.frozen(a);
    }
    if !cfg.drift {
        spec = spec.without_drift();
    }
    Ok(spec)
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<EnsembleResult> {
    let spec = sim_spec(cfg)?;
    match cfg.scheme {
        Scheme::Euler => simulate_euler_scheme(&spec, cfg.n_traj),
        Scheme::Continuous => simulate_continuous(&spec, cfg.n_traj),
        Scheme::Plateau => simulate_plateau(&spec, cfg.n_traj),
    }
    .map_err(|e| match e {
        Error::Argument(m) => Error::Config(m),
        other => other,
    })
}

fn trace_row(cfg: &ExperimentConfig, k: usize, t: f64, snap: &Snapshot) -> Result<Vec<f64>> {
    let a = level_at(cfg, t)?;
    let opts = GibbsOptions {
        tol: cfg.tol,
        ..GibbsOptions::default()
    };
    let g = GibbsMeasure::with_options(cfg.build_potential()?, a, opts)?;
    let mut tv_opts = cfg.tv_options();
    tv_opts.seed = mix(cfg.seed, 2 * k as u64);
    let tv = tv_empirical_vs_density(&snap.samples, &g, &tv_opts)?;
    let reference = sample_from(&g, snap.samples.len(), mix(cfg.seed, 2 * k as u64 + 1))?.samples;
    let w1 = if g.dim() == 1 {
        w1_1d(&snap.samples, &reference)?
    } else {
        w1_sliced(&snap.samples, &reference, cfg.w1_slices, mix(cfg.seed, u64::MAX - k as u64))?
    };
    Ok(vec![t, a, tv.value, tv.std_error, w1, snap.summary.mean_v, snap.summary.min_v])
}

/// The trace table of an ensemble simulated under `cfg`.
pub fn trace_of(cfg: &ExperimentConfig, ensemble: &EnsembleResult) -> Result<Table> {
    let times = cfg.record_times();
    if times.len() != ensemble.snapshots.len() {
        return Err(Error::arg("ensemble does not match the configured record times"));
    }
    let rows = times
        .par_iter()
        .zip(ensemble.snapshots.par_iter())
        .enumerate()
        .map(|(k, (&t, snap))| trace_row(cfg, k, t, snap))
        .collect::<Vec<_>>();
    let mut table = Table::new(TRACE_COLUMNS);
    for row in rows {
        table.push(row?);
    }
    Ok(table)
}

pub fn samples_file_name(t: f64) -> String {
    format!("samples_t{t}.csv")
}

fn write_samples(dir: &Path, t: f64, snap: &Snapshot) -> Result<()> {
    let d = snap.samples.dim();
    let mut table = Table::new((0..d).map(|j| format!("x{j}")));
    for row in snap.samples.rows() {
        table.push(row.to_vec());
    }
    table.write_csv(dir.join(samples_file_name(t)))
}

fn record_failure(dir: &Path, err: &Error) {
    let text = format!("exit code {}\n{err}\n", err.exit_code());
    let _ = fs::write(dir.join(FAILURE_FILE), text);
}

/// Runs the configured simulator and writes `config.echo`, `trace.csv`,
/// one `samples_t<t>.csv` per record time and `plots.dat` into the run
/// directory. On failure the error is also written to `failure.txt`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let cfg = cfg.resolved();
    let dir = cfg.run_dir();
    create_dir(&dir)?;
    let _ = fs::remove_file(dir.join(FAILURE_FILE));
    write_text(&dir.join("config.echo"), &cfg.echo())?;
    let outcome = (|| {
        let ensemble = simulate(&cfg)?;
        let trace = trace_of(&cfg, &ensemble)?;
        trace.write_csv(dir.join("trace.csv"))?;
        for (&t, snap) in cfg.record_times().iter().zip(&ensemble.snapshots) {
            write_samples(&dir, t, snap)?;
        }
        trace.write_plot_blocks(dir.join("plots.dat"), "t", &["tv", "w1", "mean_V", "min_V", "a_t"])?;
        Ok((trace, ensemble))
    })();
    match outcome {
        Ok((trace, ensemble)) => Ok(RunReport { dir, trace, ensemble }),
        Err(e) => {
            record_failure(&dir, &e);
            Err(e)
        }
    }
}

/// Header of `compare.csv`.
pub const COMPARE_COLUMNS: [&str; 11] = [
    "t", "a_t", "tv_eta1", "tv_se_eta1", "w1_eta1", "tv_eta", "tv_se_eta", "w1_eta", "tv_cont", "tv_se_cont", "w1_cont",
];

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub dir: PathBuf,
    pub table: Table,
    /// Per-scheme runs: Euler with `eta = 1`, Euler with `compare.eta`, continuous.
    pub runs: [RunReport; 3],
}

/// Runs the Euler scheme with `eta = 1` and with `compare.eta`, and the
/// continuous process, at the same record times. Each run keeps its own
/// subdirectory; `compare.csv` holds the tv/w1 columns side by side.
pub fn compare_schemes(cfg: &ExperimentConfig) -> Result<CompareReport> {
    cfg.validate()?;
    let cfg = cfg.resolved();
    let dir = cfg.run_dir();
    create_dir(&dir)?;
    write_text(&dir.join("config.echo"), &cfg.echo())?;
    let cell = |sub: &str, scheme: Scheme, eta: f64| {
        let mut c = cfg.clone();
        c.scheme = scheme;
        c.eta = eta;
        c.output_dir = Some(dir.join(sub));
        run_experiment(&c)
    };
    let outcome = (|| {
        let runs = [
            cell("euler_eta1", Scheme::Euler, 1.0)?,
            cell("euler_eta", Scheme::Euler, cfg.compare_eta)?,
            cell("continuous", Scheme::Continuous, cfg.eta)?,
        ];
        let a_t = runs[0].trace.column("a_t")?;
        for r in &runs[1..] {
            if r.trace.column("a_t")? != a_t {
                return Err(Error::Metric("schemes disagree on the reference level column".into()));
            }
        }
        let mut table = Table::new(COMPARE_COLUMNS);
        for (i, row) in runs[0].trace.rows.iter().enumerate() {
            let mut out = vec![row[0], row[1]];
            for r in &runs {
                let src = &r.trace.rows[i];
                out.extend_from_slice(&[src[2], src[3], src[4]]);
            }
            table.push(out);
        }
        table.write_csv(dir.join("compare.csv"))?;
        table.write_plot_blocks(dir.join("plots.dat"), "t", &["tv_eta1", "tv_eta", "tv_cont"])?;
        Ok(CompareReport { dir: dir.clone(), table, runs })
    })();
    outcome.inspect_err(|e| record_failure(&dir, e))
}
