use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::Table;
use crate::error::{Error, Result};
use crate::gibbs::{tv_gibbs_pair, GibbsOptions};
use crate::problem::{audit_assumptions, AssumptionReport, AuditGrid, AuditParams};
use crate::schedules::plateau_times;

/// Header of `gibbs_tv.csv`.
pub const SWEEP_COLUMNS: [&str; 6] = ["n", "T_n", "a_n", "a_next", "tv", "u_n"];

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub dir: PathBuf,
    pub table: Table,
    /// `max u_n / min u_n` over the sweep.
    pub band_ratio: f64,
}

/// `u_n = n · log(n) · TV(ν_{a_n}, ν_{a_{n+1}})` over the plateau grid
/// `n ∈ [sweep.n_min, sweep.n_max]`, written to `gibbs_tv.csv`.
pub fn gibbs_tv_sweep(cfg: &ExperimentConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let cfg = cfg.resolved();
    let dir = cfg.run_dir();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    fs::write(dir.join("config.echo"), cfg.echo()).map_err(|e| Error::io(&dir, e))?;

    let pot = cfg.build_potential()?;
    let schedule = cfg.anneal_schedule()?;
    let plateau = cfg.plateau_schedule()?;
    let opts = GibbsOptions {
        tol: cfg.tol,
        ..GibbsOptions::default()
    };
    let rows = (cfg.sweep_n_min..=cfg.sweep_n_max)
        .into_par_iter()
        .map(|n| {
            let (t_n, a_n) = plateau_times(&plateau, &schedule, n);
            let (_, a_next) = plateau_times(&plateau, &schedule, n + 1);
            let tv = tv_gibbs_pair(&pot, a_n, a_next, &opts)?;
            let nf = n as f64;
            Ok(vec![nf, t_n, a_n, a_next, tv, nf * nf.ln() * tv])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(SWEEP_COLUMNS);
    for row in rows {
        table.push(row);
    }
    let u = table.column("u_n")?;
    let lo = u.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = u.iter().copied().fold(0.0, f64::max);
    let band_ratio = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    table.write_csv(dir.join("gibbs_tv.csv"))?;
    table.write_plot_blocks(dir.join("plots.dat"), "n", &["u_n", "tv"])?;
    Ok(SweepReport { dir, table, band_ratio })
}

/// Assumption report for the configured potential and diffusion on a
/// Halton grid of `audit.points` points in `[−audit.half_width, audit.half_width]^d`.
/// Writes `audit.txt` when an output directory can be created.
pub fn audit(cfg: &ExperimentConfig) -> Result<AssumptionReport> {
    cfg.validate()?;
    let cfg = cfg.resolved();
    let pot = cfg.build_potential()?;
    let sigma = cfg.build_sigma()?;
    let grid = AuditGrid::halton(cfg.dim, cfg.audit_half_width, cfg.audit_points, cfg.audit_pairs, cfg.audit_r0)?;
    let report = audit_assumptions(&pot, &sigma, &grid, &AuditParams::new(cfg.audit_r0, cfg.audit_alpha0))?;
    let dir = cfg.run_dir();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    fs::write(dir.join("config.echo"), cfg.echo()).map_err(|e| Error::io(&dir, e))?;
    let path = dir.join("audit.txt");
    fs::write(&path, report.to_string()).map_err(|e| Error::io(&path, e))?;
    Ok(report)
}
