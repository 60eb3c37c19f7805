//! Configuration to run directory to fitted decay rate, the same path the
//! `lsa run` and `lsa fit` verbs take.
//!
//! ```text
//! cargo run --release --example experiment_pipeline
//! ```

use langevin_anneal::harness::{fit_rate, run_experiment, ExperimentConfig, Table};

fn main() -> langevin_anneal::Result<()> {
    let out = std::env::temp_dir().join("lsa-example-pipeline");
    let mut cfg = ExperimentConfig::parse_str(
        "potential = double_well\n\
         potential.well_sep = 4\n\
         potential.hess_left = 0.5\n\
         sigma.scale = 0.65\n\
         gamma1 = 1\n\
         eta = 0.51\n\
         noise.c_zeta = 0.1\n\
         sim.x0 = 4\n\
         sim.horizon = 320\n\
         sim.n_traj = 2000\n\
         record.t0 = 1.25\n",
    )?;
    cfg.set("output.dir", &out.display().to_string())?;

    let report = run_experiment(&cfg)?;
    let trace = Table::read_csv(report.dir.join("trace.csv"))?;
    for row in &trace.rows {
        println!("t = {:>6}  a = {:.3}  tv = {:.3}  w1 = {:.3}", row[0], row[1], row[2], row[4]);
    }
    println!("{}", fit_rate(&trace, "tv", (10.0, 320.0))?);
    println!("outputs in {}", report.dir.display());
    Ok(())
}
