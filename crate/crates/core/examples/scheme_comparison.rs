//! Euler scheme with `eta = 1` and `eta = 0.6` next to the continuous
//! process on a quadratic, plus the plateau TV sweep behind `lsa gibbs-tv`.
//!
//! ```text
//! cargo run --release --example scheme_comparison
//! ```

use langevin_anneal::harness::{compare_schemes, gibbs_tv_sweep, ExperimentConfig};

fn main() -> langevin_anneal::Result<()> {
    let root = std::env::temp_dir().join("lsa-example-compare");
    let mut cfg = ExperimentConfig::default();
    for (k, v) in [
        ("potential", "quadratic"),
        ("gamma1", "1"),
        ("compare.eta", "0.6"),
        ("sim.fine_dt", "0.01"),
        ("sim.x0", "2"),
        ("sim.horizon", "8"),
        ("sim.n_traj", "2000"),
    ] {
        cfg.set(k, v)?;
    }
    cfg.output_dir = Some(root.join("compare"));
    let report = compare_schemes(&cfg)?;
    println!("{}", report.table.columns.join("  "));
    for row in &report.table.rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.3}")).collect();
        println!("{}", cells.join("  "));
    }

    let mut sweep_cfg = ExperimentConfig::default();
    sweep_cfg.set("A", "1")?;
    sweep_cfg.output_dir = Some(root.join("sweep"));
    let sweep = gibbs_tv_sweep(&sweep_cfg)?;
    println!("\nn log(n) TV(nu_a_n, nu_a_n+1) for n in [10, 1000]: max/min = {:.3}", sweep.band_ratio);
    Ok(())
}
