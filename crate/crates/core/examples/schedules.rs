//! The annealing level, a decreasing step sequence with its clock and the
//! plateau grid.
//!
//! ```text
//! cargo run --example schedules
//! ```

use langevin_anneal::schedules::{plateau_times, AnnealSchedule, PlateauSchedule, StepSequence};

fn main() -> langevin_anneal::Result<()> {
    let a = AnnealSchedule::new(2.0)?;
    for t in [0.0, 1.0, 10.0, 1e3, 1e6] {
        println!("a({t:>9}) = {:.5}", a.a_of_t(t)?);
    }

    let steps = StepSequence::power(0.1, 2.0 / 3.0)?;
    println!("\nGamma_1000 = {:.4}", steps.cumulative(1000)?);
    for t in [1.0, 10.0, 50.0] {
        let n = steps.n_of_t(t)?;
        println!("N({t}) = {n}  (Gamma_N = {:.4}, Gamma_N+1 = {:.4})", steps.cumulative(n)?, steps.cumulative(n + 1)?);
    }
    for (g1, eta) in [(0.5, 1.0), (1.0, 2.0 / 3.0)] {
        let s = StepSequence::power(g1, eta)?;
        println!("varpi proxy, gamma1 = {g1}, eta = {eta:.3}: {:.5}", s.varpi_estimate(100_000)?);
    }

    let plateau = PlateauSchedule::new(1.0, 1.0)?;
    println!();
    for n in [1, 10, 100] {
        let (t, level) = plateau_times(&plateau, &a, n);
        println!("T_{n} = {t}, a_{n} = {level:.5}");
    }
    Ok(())
}
