//! A driftless martingale run at constant level `a0` matches the unit-level
//! martingale run for the time-changed horizon `a0^2 t`.
//!
//! ```text
//! cargo run --release --example time_change
//! ```

use langevin_anneal::dynamics::{simulate_continuous, time_change_inverse, SimSpec, TimeScale};
use langevin_anneal::metrics::w1_1d;
use langevin_anneal::problem::{DiffusionField, Potential};
use langevin_anneal::schedules::AnnealSchedule;

fn main() -> langevin_anneal::Result<()> {
    let pot = Potential::quadratic(1, 1.0)?;
    let sigma = DiffusionField::sin_diagonal(1, 2.0, 1.0)?;
    let schedule = AnnealSchedule::new(1.0)?;
    let (a0, t) = (0.5, 1.0);

    let horizon = time_change_inverse(&TimeScale::Constant(a0), t)?;
    let decaying = time_change_inverse(&TimeScale::Schedule(schedule), t)?;
    println!("unit-clock horizon for a0 = {a0}: {horizon}; for a(s) on [0, {t}]: {decaying:.6}");

    let n = 10_000;
    let slow = SimSpec::new(pot.clone(), sigma.clone(), schedule, vec![0.0], t)
        .frozen(a0)
        .without_drift()
        .with_fine_dt(1e-3)
        .with_seed(10);
    let unit = SimSpec::new(pot, sigma, schedule, vec![0.0], horizon)
        .frozen(1.0)
        .without_drift()
        .with_fine_dt(1e-3)
        .with_seed(11);
    let w = w1_1d(
        &simulate_continuous(&slow, n)?.terminal().samples,
        &simulate_continuous(&unit, n)?.terminal().samples,
    )?;
    println!("W1 between the two terminal clouds: {w:.4} (3/sqrt(n) = {:.4})", 3.0 / (n as f64).sqrt());
    Ok(())
}
