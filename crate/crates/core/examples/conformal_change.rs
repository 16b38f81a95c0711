//! Conformal change g' = e^{2φ} g on S²: transformed kernels, the measure
//! transformation rule and total Q-curvature.
use std::sync::Arc;

use lqg::cgf::{sample_field_at, RngStream};
use lqg::experiment::random_phi;
use lqg::gmc::{conformal_measure_transform, Flavor, LqgBuilder, Scheme};
use lqg::manifolds::ManifoldModel;
use lqg::polyakov::total_q_invariance_check;
use lqg::spectral::{ConformalChange, GjmsSpectrum};

fn main() -> lqg::Result<()> {
    let s2 = ManifoldModel::unit_sphere(2)?;
    let modes = GjmsSpectrum::of(&s2, 10)?.mode_set(24)?;
    let basis = Arc::new(modes.basis(Arc::new(s2.quadrature(10)?)));
    let phi = random_phi(&basis, 15, 0.2, 0.0, &mut RngStream::new(5, 0));
    let change = ConformalChange::new(basis.clone(), &phi)?;
    println!("vol' = {:.5}, Var ξ = {:.3e}", change.volume_prime(), change.xi_variance());
    println!("grounding residual {:.2e}", change.grounding_residual());

    let b = LqgBuilder::from_basis(basis.clone(), 1.0, Flavor::Plain, Scheme::Eigenfunction)?;
    let (w, _) = conformal_measure_transform(&b, &change, &sample_field_at(&modes, 9, 0));
    println!("μ'(M) of one sample = {:.5}", w.iter().sum::<f64>());

    let q = total_q_invariance_check(&basis, &phi)?;
    println!("total Q: {:.10} vs {:.10}", q.total_g, q.total_g_prime);
    Ok(())
}
