//! Martingale property of the eigenfunction approximation: fine-level mass
//! regressed on coarse-level mass.
use std::sync::Arc;

use lqg::gmc::{ball_indices, martingale_check};
use lqg::manifolds::ManifoldModel;
use lqg::spectral::GjmsSpectrum;

fn main() -> lqg::Result<()> {
    let s2 = ManifoldModel::unit_sphere(2)?;
    let modes = GjmsSpectrum::of(&s2, 10)?.mode_set(40)?;
    let grid = Arc::new(s2.quadrature(12)?);
    let ball = ball_indices(&grid, &s2, &s2.base_point(), 1.0);
    let r = martingale_check(&modes, grid, 1.0, &ball, 10, 200, 50, 3)?;
    println!("slope     {:.4} ± {:.4}", r.fit.slope.value, r.fit.slope.std_err);
    println!("intercept {:.4} ± {:.4}", r.fit.intercept.value, r.fit.intercept.std_err);
    Ok(())
}
