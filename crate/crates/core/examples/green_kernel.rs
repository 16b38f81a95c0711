//! Grounded resolvent on the unit sphere against its closed form.
use std::f64::consts::PI;

use lqg::manifolds::ManifoldModel;
use lqg::spectral::{distance_ladder, KernelEvaluator, KernelKind};

fn main() -> lqg::Result<()> {
    let s2 = ManifoldModel::unit_sphere(2)?;
    let ev = KernelEvaluator::laplace(
        &s2.laplace_spectrum(200)?,
        KernelKind::GroundedResolvent { s: 1.0, alpha: 0.0 },
    )?;
    println!("{:>8} {:>14} {:>14} {:>10}", "d", "spectral", "closed form", "error");
    for d in distance_ladder(0.1, PI - 0.1, 12) {
        let v = ev.eval_at_distance(d);
        let exact = -(1.0 + 2.0 * (0.5 * d).sin().ln()) / (4.0 * PI);
        println!("{d:8.4} {v:14.8} {exact:14.8} {:10.2e}", v - exact);
    }
    Ok(())
}
