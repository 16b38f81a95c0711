//! Heat-kernel lower bound on S² and the resolvent computed two ways.
use lqg::manifolds::ManifoldModel;
use lqg::spectral::{lower_bound_check, resolvent_kernel_eval, resolvent_via_heat};

fn main() -> lqg::Result<()> {
    let s2 = ManifoldModel::unit_sphere(2)?;
    for t in [0.1, 0.5, 1.0] {
        for d in [0.5, 1.5, 3.0] {
            let c = lower_bound_check(&s2, 1.0, t, d, 1e-10)?;
            println!("t={t:.1} d={d:.1}: p_t = {:.6e} ≥ {:.6e}  {}", c.kernel, c.bound, c.holds);
        }
    }
    let spec = s2.laplace_spectrum(60)?;
    let x = s2.base_point();
    let y = s2.point_at_distance(&x, 0.8);
    for (s, alpha) in [(1.0, 0.5), (2.0, 1.0)] {
        let a = resolvent_kernel_eval(&spec, s, alpha, false, &x, &y)?;
        let b = resolvent_via_heat(&spec, s, alpha, false, &x, &y)?;
        println!("G_(s={s},α={alpha}): spectral {a:.10} heat {b:.10}");
    }
    Ok(())
}
