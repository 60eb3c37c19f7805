//! Gibbs measures of an asymmetric double well: normalization, mass of each
//! well, the zero-temperature limit, TV between two levels and exact
//! sampling.
//!
//! ```text
//! cargo run --example gibbs_reference
//! ```

use langevin_anneal::gibbs::{limit_measure, sample_gibbs, tv_gibbs_pair, GibbsMeasure, GibbsOptions};
use langevin_anneal::problem::Potential;

fn main() -> langevin_anneal::Result<()> {
    let pot = Potential::double_well(1, 1.0, 1.0, 4.0)?;

    let limit = limit_measure(&pot)?;
    for (x, w) in &limit.atoms {
        println!("limit atom at {x:?} with weight {w:.4}");
    }

    for a in [0.6, 0.3, 0.15] {
        let g = GibbsMeasure::new(pot.clone(), a)?;
        let left = g.ball_mass(&[-1.0], 0.3)?;
        let right = g.ball_mass(&[1.0], 0.3)?;
        println!("a = {a:4}: z = {:.5}, left well {left:.4}, right well {right:.4}", g.z()?);
    }

    let tv = tv_gibbs_pair(&pot, 0.5, 0.45, &GibbsOptions::default())?;
    println!("TV(nu_0.5, nu_0.45) = {tv:.5}");

    let draw = sample_gibbs(&pot, 0.3, 20_000, 7)?;
    let right = draw.samples.as_slice().iter().filter(|&&x| x > 0.0).count() as f64 / 20_000.0;
    println!(
        "20000 draws at a = 0.3: acceptance {:.3}, fraction right of 0 = {right:.4}",
        draw.acceptance_rate
    );
    Ok(())
}
