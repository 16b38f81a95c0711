//! Liouville measures on S²: mean total mass for several γ and flavors.
use std::f64::consts::PI;
use std::sync::Arc;

use lqg::gmc::{total_masses, Flavor, LqgBuilder, Scheme};
use lqg::manifolds::ManifoldModel;
use lqg::spectral::GjmsSpectrum;
use lqg::stats::Estimate;

fn main() -> lqg::Result<()> {
    let s2 = ManifoldModel::unit_sphere(2)?;
    let modes = GjmsSpectrum::of(&s2, 10)?.mode_set(48)?;
    let grid = Arc::new(s2.quadrature(16)?);
    for flavor in [Flavor::Plain, Flavor::Adjusted] {
        for gamma in [0.5, 1.0, 1.5] {
            let b = LqgBuilder::new(&modes, grid.clone(), gamma, flavor, Scheme::Eigenfunction)?;
            let e = Estimate::from_samples(&total_masses(&b, 4000, 7));
            println!("{flavor:?} γ={gamma}: E μ(M) = {:.4} ± {:.4}  (4π = {:.4})", e.value, e.std_err, 4.0 * PI);
        }
    }
    Ok(())
}
