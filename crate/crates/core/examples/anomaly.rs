//! Conformal anomaly of the adjusted and plain Polyakov–Liouville measures.
use std::sync::Arc;

use lqg::cgf::RngStream;
use lqg::experiment::random_phi;
use lqg::gmc::{LqgBuilder, Scheme};
use lqg::manifolds::ManifoldModel;
use lqg::polyakov::{conformal_anomaly_check, PolyakovParams};
use lqg::spectral::{ConformalChange, GjmsSpectrum};

fn main() -> lqg::Result<()> {
    let s2 = ManifoldModel::unit_sphere(2)?;
    let modes = GjmsSpectrum::of(&s2, 10)?.mode_set(24)?;
    let basis = Arc::new(modes.basis(Arc::new(s2.quadrature(12)?)));
    let phi = random_phi(&basis, 15, 0.1, 0.05, &mut RngStream::new(2, 0));
    let change = ConformalChange::new(basis.clone(), &phi)?;
    for p in [PolyakovParams::special_adjusted(2, 1.0, 1.0), PolyakovParams::special_plain(2, 1.0, 1.0)] {
        let b = LqgBuilder::from_basis(basis.clone(), 1.0, p.measure_flavor(), Scheme::Eigenfunction)?;
        let r = conformal_anomaly_check(&p, &b, &change, 20_000, 4)?;
        println!(
            "{:?}: estimate {:.4} ± {:.4}, closed form {:.4}",
            p.flavor, r.anomaly_est.value, r.anomaly_est.std_err, r.anomaly_pred
        );
    }
    Ok(())
}
