//! Continuous and plateau processes. At a frozen level both relax to the
//! Gibbs measure; with the plateau schedule the level steps down on
//! `T_n = c_T n^(1 + beta)`.
//!
//! ```text
//! cargo run --release --example frozen_equilibrium
//! ```

use langevin_anneal::dynamics::{simulate_continuous, simulate_plateau, SimSpec};
use langevin_anneal::gibbs::GibbsMeasure;
use langevin_anneal::metrics::{tv_empirical_vs_density, TvOptions};
use langevin_anneal::problem::{DiffusionField, Potential};
use langevin_anneal::schedules::{AnnealSchedule, PlateauSchedule};

fn main() -> langevin_anneal::Result<()> {
    let quad = Potential::quadratic(1, 1.0)?;
    let schedule = AnnealSchedule::new(1.0)?;
    let frozen = SimSpec::new(quad.clone(), DiffusionField::scalar(1, 1.0)?, schedule, vec![3.0], 20.0)
        .frozen(1.0)
        .with_fine_dt(1e-3)
        .with_record_times(vec![0.5, 2.0, 20.0]);
    let run = simulate_continuous(&frozen, 5000)?;
    let nu = GibbsMeasure::new(quad, 1.0)?;
    for snap in &run.snapshots {
        let tv = tv_empirical_vs_density(&snap.samples, &nu, &TvOptions::default())?;
        println!("frozen a = 1, t = {:>4}: TV = {:.3}, variance {:.4} (target 0.5)", snap.time, tv.value, snap.summary.covariance[0]);
    }

    let dw = Potential::double_well(1, 1.0, 1.0, 4.0)?;
    let plateau = PlateauSchedule::new(1.0, 1.0)?;
    let spec = SimSpec::new(dw.clone(), DiffusionField::scalar(1, 1.0)?, schedule, vec![2.0], 49.0)
        .with_fine_dt(1e-3)
        .with_plateau(plateau)
        .with_record_times(vec![3.9, 15.9, 48.9]);
    let run = simulate_plateau(&spec, 3000)?;
    for snap in &run.snapshots {
        let a = schedule.level(plateau.time(plateau.index_at(snap.time) + 1));
        let tv = tv_empirical_vs_density(&snap.samples, &GibbsMeasure::new(dw.clone(), a)?, &TvOptions::default())?;
        println!("plateau, t = {:>5}: level {a:.4}, TV = {:.3}", snap.time, tv.value);
    }
    Ok(())
}
