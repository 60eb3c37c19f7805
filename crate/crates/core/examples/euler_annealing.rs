//! Decreasing-step Euler scheme on a double well with stochastic-gradient
//! noise, tracking the distance to the moving Gibbs reference.
//!
//! ```text
//! cargo run --release --example euler_annealing
//! ```

use langevin_anneal::dynamics::{simulate_euler_scheme, NoiseModel, SimSpec};
use langevin_anneal::gibbs::GibbsMeasure;
use langevin_anneal::metrics::{tv_empirical_vs_density, TvOptions};
use langevin_anneal::problem::{DiffusionField, Potential};
use langevin_anneal::schedules::{AnnealSchedule, StepSequence};

fn main() -> langevin_anneal::Result<()> {
    let pot = Potential::double_well(1, 4.0, 0.5, 1.0)?;
    let schedule = AnnealSchedule::new(2.0)?;
    let times = vec![1.0, 10.0, 100.0, 300.0];
    let spec = SimSpec::new(pot.clone(), DiffusionField::scalar(1, 0.65)?, schedule, vec![4.0], 300.0)
        .with_steps(StepSequence::power(1.0, 0.51)?)
        .with_noise(NoiseModel::GaussianScaled { c_zeta: 0.1 })
        .with_record_times(times)
        .with_seed(1);
    let run = simulate_euler_scheme(&spec, 2000)?;
    for snap in &run.snapshots {
        let a = schedule.level(snap.time);
        let tv = tv_empirical_vs_density(&snap.samples, &GibbsMeasure::new(pot.clone(), a)?, &TvOptions::default())?;
        let left = snap.samples.as_slice().iter().filter(|&&x| x < 0.0).count() as f64 / snap.samples.len() as f64;
        println!(
            "t = {:>5}: a = {a:.3}, TV = {:.3} +- {:.3}, mean V = {:.3}, best V so far = {:.4}, left well {left:.3}",
            snap.time, tv.value, tv.std_error, snap.summary.mean_v, snap.summary.min_v
        );
    }
    Ok(())
}
