//! Sample a co-polyharmonic field on S² and dump it on a grid.
use std::sync::Arc;

use lqg::cgf::{sample_field_at, RngStream};
use lqg::manifolds::ManifoldModel;
use lqg::spectral::{covariance_form, GjmsSpectrum};
use lqg::stats::covariance_estimate;

fn main() -> lqg::Result<()> {
    let s2 = ManifoldModel::unit_sphere(2)?;
    let modes = GjmsSpectrum::of(&s2, 10)?.mode_set(48)?;
    let basis = modes.basis(Arc::new(s2.quadrature(16)?));

    let h = sample_field_at(&modes, 42, 0);
    h.write_grid_csv(&basis, std::io::stdout().lock())?;

    let mut rng = RngStream::new(1, 0);
    let u = rng.normals(modes.len());
    let v = rng.normals(modes.len());
    let (a, b): (Vec<f64>, Vec<f64>) = (0..5000)
        .map(|i| {
            let s = sample_field_at(&modes, 42, i);
            (s.pair(&u), s.pair(&v))
        })
        .unzip();
    let e = covariance_estimate(&a, &b);
    eprintln!(
        "Cov[<h,u>,<h,v>] = {:.5} ± {:.5}, form = {:.5}",
        e.value,
        e.std_err,
        covariance_form(&modes, &u, &v)
    );
    Ok(())
}
