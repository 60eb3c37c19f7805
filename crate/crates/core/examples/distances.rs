//! Distance estimators: KDE-based TV between clouds and against a density,
//! exact and sliced W1, and the closed-form TV between Gaussians.
//!
//! ```text
//! cargo run --example distances
//! ```

use langevin_anneal::gibbs::{sample_gibbs, GibbsMeasure};
use langevin_anneal::metrics::{tv_empirical, tv_empirical_vs_density, tv_gaussian_1d, w1_1d, w1_sliced, TvOptions};
use langevin_anneal::problem::Potential;

fn main() -> langevin_anneal::Result<()> {
    let quad = Potential::quadratic(1, 1.0)?;
    // nu_1 for V = 1 + x^2/2 is N(0, 1/2); nu_0.8 is N(0, 0.32).
    let p = sample_gibbs(&quad, 1.0, 5000, 1)?.samples;
    let q = sample_gibbs(&quad, 0.8, 5000, 2)?.samples;
    let exact = tv_gaussian_1d(0.0, 0.5f64.sqrt(), 0.0, 0.32f64.sqrt())?;
    let est = tv_empirical(&p, &q, &TvOptions::default())?;
    println!("TV(nu_1, nu_0.8): exact {exact:.4}, from 5000 + 5000 samples {:.4} +- {:.4}", est.value, est.std_error);

    let g = GibbsMeasure::new(quad.clone(), 1.0)?;
    let own = tv_empirical_vs_density(&p, &g, &TvOptions::default())?;
    println!("TV(cloud from nu_1, nu_1) = {:.4} +- {:.4}", own.value, own.std_error);

    println!("W1 = {:.4} (exact value {:.4})", w1_1d(&p, &q)?, (0.5f64.sqrt() - 0.32f64.sqrt()) * (2.0 / std::f64::consts::PI).sqrt());

    let plane = Potential::quadratic(2, 1.0)?;
    let p2 = sample_gibbs(&plane, 1.0, 4000, 3)?.samples;
    let q2 = sample_gibbs(&plane, 0.5, 4000, 4)?.samples;
    println!("sliced W1 in 2D with 64 directions = {:.4}", w1_sliced(&p2, &q2, 64, 0)?);
    Ok(())
}
