//! Random GJMS operator on S²: Galerkin spectrum and heat flow.
use std::sync::Arc;

use lqg::cgf::sample_field_at;
use lqg::dynamics::{energy_dissipation_check, random_gjms_assemble};
use lqg::gmc::{Flavor, LqgBuilder, Scheme};
use lqg::manifolds::ManifoldModel;
use lqg::spectral::GjmsSpectrum;

fn main() -> lqg::Result<()> {
    let s2 = ManifoldModel::unit_sphere(2)?;
    let modes = GjmsSpectrum::of(&s2, 10)?.mode_set(35)?;
    let basis = Arc::new(modes.basis(Arc::new(s2.quadrature(16)?)));
    let b = LqgBuilder::from_basis(basis.clone(), 1.0, Flavor::Plain, Scheme::Eigenfunction)?;
    let op = random_gjms_assemble(&basis, &b.build(&sample_field_at(&modes, 3, 0)).weights)?;
    let head: Vec<String> = op.grounded_spectrum().iter().take(8).map(|t| format!("{t:.3}")).collect();
    println!("θ: {}", head.join(" "));
    let u0: Vec<f64> = (0..op.len()).map(|j| 1.0 / (1.0 + j as f64)).collect();
    let rep = energy_dissipation_check(&op, &u0, &[0.0, 0.1, 1.0]);
    for r in &rep.rows {
        println!("t={:.1} ½𝔭={:.6} d/dt={:.6} -‖Pu‖²={:.6}", r.t, r.energy, r.fd_derivative, -r.dissipation);
    }
    op.write_spectrum_csv(std::fs::File::create(std::env::temp_dir().join("theta.csv"))?)?;
    Ok(())
}
