//! Liouville Brownian motion on the flat torus: one time-changed path and
//! the Revuz identity for u = 1.
use lqg::cgf::RngStream;
use lqg::dynamics::{additive_functional, revuz_check, revuz_field, simulate_bm, time_change, RevuzSetup};
use lqg::manifolds::ManifoldModel;
use lqg::spectral::GjmsSpectrum;

fn main() -> lqg::Result<()> {
    let t2 = ManifoldModel::torus(vec![2.0 * std::f64::consts::PI; 2])?;
    let modes = GjmsSpectrum::of(&t2, 4)?.mode_set(24)?;
    let h = revuz_field(&modes, 1);

    let path = simulate_bm(&t2, &t2.base_point(), 1.0, 0.01, &mut RngStream::new(1, 0))?;
    let a = additive_functional(&path, &h, 1.0);
    let x = time_change(&path, &a, 1.0, 0.05)?;
    x.write_csv(std::io::stdout().lock())?;
    eprintln!("A(1) = {:.4}, truncated = {}", a.values.last().unwrap(), x.truncated);

    let setup = RevuzSetup {
        x0: t2.base_point(),
        t: 1.0,
        dt: 0.01,
        gamma: 1.0,
        heat_cutoff: 20,
    };
    let r = revuz_check(&setup, &h, |_| 1.0, &t2.quadrature_for_band(31)?, 2000, 1)?;
    eprintln!("Revuz: paths {:.4} ± {:.4}, spectral {:.4}", r.lhs.value, r.lhs.std_err, r.rhs);
    Ok(())
}
