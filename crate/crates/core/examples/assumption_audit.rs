//! Builds the builtin potentials and diffusion fields, evaluates the drift
//! with its correction term, and prints the grid audit of the standing
//! assumptions.
//!
//! ```text
//! cargo run --example assumption_audit
//! ```

use langevin_anneal::problem::{
    audit_assumptions, correction_term, drift, AuditGrid, AuditParams, DiffusionField, Potential, DEFAULT_FD_STEP,
};

fn main() -> langevin_anneal::Result<()> {
    let pot = Potential::double_well(1, 1.0, 1.0, 4.0)?;
    let sigma = DiffusionField::sin_diagonal(1, 2.0, 0.5)?;

    for x in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let v = pot.value(&[x]);
        let b = drift(&pot, &sigma, 0.5, &[x])?;
        let u = correction_term(&sigma, &[x], DEFAULT_FD_STEP)?;
        println!("x = {x:5.2}  V = {v:8.4}  b_0.5 = {:9.4}  correction = {:8.5}", b[0], u[0]);
    }

    let grid = AuditGrid::default_for(1, 3.0)?;
    let flat = DiffusionField::scalar(1, 1.0)?;
    let report = audit_assumptions(&pot, &flat, &grid, &AuditParams::new(3.0, 0.01))?;
    println!("\n{report}");

    // A strongly modulated sigma breaks dissipativity on the same grid.
    let wobbly = DiffusionField::sin_diagonal(1, 2.0, 1.0)?;
    let report = audit_assumptions(&pot, &wobbly, &grid, &AuditParams::new(3.0, 0.01))?;
    println!("sigma = 2 + sin(x): all pass = {}", report.all_pass());
    Ok(())
}
