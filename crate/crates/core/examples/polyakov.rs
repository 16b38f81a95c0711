//! Polyakov–Liouville partition function on S² by both routes, and the gates.
use std::f64::consts::PI;
use std::sync::Arc;

use lqg::gmc::{Flavor, LqgBuilder, Scheme};
use lqg::manifolds::ManifoldModel;
use lqg::polyakov::{partition_function, q_curvature, PolyakovFlavor, PolyakovParams};
use lqg::spectral::GjmsSpectrum;

fn main() -> lqg::Result<()> {
    let s2 = ManifoldModel::unit_sphere(2)?;
    let q = q_curvature(&s2)?;
    println!("Q = {}, Q(M) = {:.6}", q.value, q.total);
    let modes = GjmsSpectrum::of(&s2, 10)?.mode_set(24)?;
    let b = LqgBuilder::new(&modes, Arc::new(s2.quadrature(12)?), 1.0, Flavor::Plain, Scheme::Eigenfunction)?;
    let p = PolyakovParams {
        flavor: PolyakovFlavor::Plain,
        gamma: 1.0,
        theta: 1.0 / PI,
        theta_star: -5.0,
        m: 1.0,
    };
    let r = partition_function(&p, &b, 20_000, 1)?;
    println!("{}", serde_json::to_string_pretty(&r)?);
    let boundary = PolyakovParams { theta_star: -4.0, ..p };
    println!("boundary: {}", boundary.check(2, q.total).unwrap_err());
    Ok(())
}
