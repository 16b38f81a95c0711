//! GJMS operators on spheres as polynomials in the Laplacian, the first
//! eigenvalues on a few model manifolds, and Weyl growth.
use lqg::manifolds::{ManifoldKind, ManifoldModel};
use lqg::spectral::{gjms_sphere_polynomial, weyl_check, GjmsSpectrum};

fn poly(c: &[i64]) -> String {
    let mut terms = Vec::new();
    for (k, a) in c.iter().enumerate().rev() {
        if *a != 0 {
            terms.push(format!("{a}·Δ^{k}"));
        }
    }
    terms.join(" + ")
}

fn main() -> lqg::Result<()> {
    for n in [2, 4, 6] {
        println!("S^{n}: P = {}", poly(&gjms_sphere_polynomial(n)));
    }
    for kind in [
        ManifoldKind::unit_sphere(4),
        ManifoldKind::square_torus(2, 1.0),
        ManifoldKind::ProductSurfaces {
            curvature_1: 1.0,
            curvature_2: 1.0,
        },
    ] {
        let spec = GjmsSpectrum::of(&ManifoldModel::new(kind.clone())?, 6)?;
        let first: Vec<String> = spec.entries().iter().take(5).map(|e| format!("{:.3}", e.nu)).collect();
        println!("{kind:?}: admissible = {}, ν = [{}]", spec.is_admissible(), first.join(", "));
    }
    let w = weyl_check(&GjmsSpectrum::of(&ManifoldModel::unit_sphere(2)?, 40)?)?;
    println!("S² Weyl slope {:.4} (predicted {:.4}), bounded = {}", w.slope, w.predicted_slope, w.bounded);
    Ok(())
}
