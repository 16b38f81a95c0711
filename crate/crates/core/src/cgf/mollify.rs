//! Mollified fields `h_q(y) = ⟨h, q(·, y)⟩`: every mollifier is applied to the
//! basis functions, so a mollified field is `Σ c_j (q ψ_j)(y)`.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LqgError, Result};
use crate::manifolds::{ManifoldKind, Point, QuadratureGrid};
use crate::spectral::{GridBasis, ModeSet};
use crate::special::{gauss_legendre_interval, gegenbauer_ratio};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum Mollifier {
    /// Heat semigroup at time `t`: `ψ_j ↦ e^{-λ_j t} ψ_j`.
    Heat { t: f64 },
    /// Average over the cell of a uniform partition with `cells` cells per axis (tori).
    Partition { cells: usize },
    /// Average over the geodesic ball of the given radius.
    Ball { radius: f64 },
}

/// `(q ψ_j)(x)` for every mode.
pub fn mollified_values(modes: &ModeSet, q: &Mollifier, x: &Point) -> Result<Vec<f64>> {
    let mut v = vec![0.0; modes.len()];
    match *q {
        Mollifier::Heat { t } => {
            if !(t >= 0.0) {
                return Err(LqgError::Domain(format!("heat mollifier needs t ≥ 0 (got {t})")));
            }
            modes.eval_at(x, &mut v);
            for (a, l) in v.iter_mut().zip(modes.lambda()) {
                *a *= (-l * t).exp();
            }
        }
        Mollifier::Ball { radius } => {
            let mult = ball_multipliers(modes, radius)?;
            modes.eval_at(x, &mut v);
            for (a, m) in v.iter_mut().zip(&mult) {
                *a *= m;
            }
        }
        Mollifier::Partition { cells } => {
            let ManifoldKind::FlatTorus { sides, .. } = modes.model().kind() else {
                return Err(LqgError::Unsupported("partition mollifier is implemented on tori".into()));
            };
            if cells == 0 {
                return Err(LqgError::InvalidParameter("partition needs at least one cell".into()));
            }
            let (t, w) = gauss_legendre_interval(8, 0.0, 1.0);
            let n = sides.len();
            let lo: Vec<f64> = sides
                .iter()
                .zip(&x.coords)
                .map(|(l, c)| {
                    let h = l / cells as f64;
                    ((c / h).floor().min(cells as f64 - 1.0)) * h
                })
                .collect();
            let mut idx = vec![0usize; n];
            let mut buf = vec![0.0; modes.len()];
            loop {
                let mut weight = 1.0;
                let c: Vec<f64> = (0..n)
                    .map(|a| {
                        weight *= w[idx[a]];
                        lo[a] + t[idx[a]] * sides[a] / cells as f64
                    })
                    .collect();
                modes.eval_at(&Point::new(c), &mut buf);
                for (o, b) in v.iter_mut().zip(&buf) {
                    *o += weight * b;
                }
                let mut a = n;
                loop {
                    if a == 0 {
                        return Ok(v);
                    }
                    a -= 1;
                    idx[a] += 1;
                    if idx[a] < t.len() {
                        break;
                    }
                    idx[a] = 0;
                }
            }
        }
    }
    Ok(v)
}

/// Ball-average multipliers: on spheres by Funk–Hecke, on tori the average of
/// `cos(k·v)` over the Euclidean ball.
fn ball_multipliers(modes: &ModeSet, radius: f64) -> Result<Vec<f64>> {
    if !(radius > 0.0) {
        return Err(LqgError::Domain(format!("ball radius must be positive (got {radius})")));
    }
    let (rho, wr) = gauss_legendre_interval(64, 0.0, 1.0);
    match modes.model().kind() {
        ManifoldKind::Sphere { n, radius: r } => {
            let a = radius / r;
            if a >= PI {
                return Err(LqgError::Domain("ball radius exceeds the diameter".into()));
            }
            let nm1 = *n as f64 - 1.0;
            let degrees: Vec<usize> = modes
                .lambda()
                .iter()
                .map(|l| ((-nm1 + (nm1 * nm1 + 4.0 * l * r * r).sqrt()) / 2.0).round() as usize)
                .collect();
            let lmax = degrees.iter().cloned().max().unwrap_or(0);
            let mut acc = vec![0.0; lmax + 1];
            let mut mass = 0.0;
            let mut buf = Vec::new();
            for (s, w) in rho.iter().zip(&wr) {
                let th = a * s;
                let wt = w * th.sin().powf(nm1);
                gegenbauer_ratio(0.5 * nm1, lmax, th.cos(), &mut buf);
                for (o, b) in acc.iter_mut().zip(&buf) {
                    *o += wt * b;
                }
                mass += wt;
            }
            Ok(degrees.iter().map(|l| acc[*l] / mass).collect())
        }
        ManifoldKind::FlatTorus { n, .. } => {
            let nf = *n as f64;
            let (th, wt) = gauss_legendre_interval(64, 0.0, PI);
            let shell_mass: f64 = th.iter().zip(&wt).map(|(t, w)| w * t.sin().powf(nf - 2.0)).sum();
            let sphere_avg = |z: f64| -> f64 {
                th.iter()
                    .zip(&wt)
                    .map(|(t, w)| w * t.sin().powf(nf - 2.0) * (z * t.cos()).cos())
                    .sum::<f64>()
                    / shell_mass
            };
            Ok(modes
                .lambda()
                .iter()
                .map(|l| {
                    let k = l.sqrt();
                    nf * rho
                        .iter()
                        .zip(&wr)
                        .map(|(s, w)| w * s.powf(nf - 1.0) * sphere_avg(k * radius * s))
                        .sum::<f64>()
                })
                .collect())
        }
        ManifoldKind::ProductSurfaces { .. } => Err(LqgError::Unsupported(
            "ball mollifier is implemented on spheres and tori".into(),
        )),
    }
}

/// `(q ⊗ q) k_ℓ (x, y) = Σ_{j≥1} (qψ_j)(x) (qψ_j)(y) / (a_n ν_j)`.
pub fn mollified_covariance(modes: &ModeSet, q: &Mollifier, x: &Point, y: &Point) -> Result<f64> {
    let a = mollified_values(modes, q, x)?;
    let b = mollified_values(modes, q, y)?;
    let a_n = modes.a_n();
    Ok((1..modes.len()).map(|j| a[j] * b[j] / (a_n * modes.nu()[j])).sum())
}

/// Grid basis whose rows are the mollified basis functions.
pub fn mollified_basis(modes: &Arc<ModeSet>, grid: Arc<QuadratureGrid>, q: &Mollifier) -> Result<GridBasis> {
    let rows: Vec<Vec<f64>> = grid
        .points()
        .par_iter()
        .map(|p| mollified_values(modes, q, p))
        .collect::<Result<_>>()?;
    Ok(GridBasis::from_values(modes.clone(), grid, rows.concat()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::{ManifoldModel, Mode};
    use crate::spectral::GjmsSpectrum;

    #[test]
    fn heat_at_zero_is_identity() {
        let m = GjmsSpectrum::of(&ManifoldModel::unit_sphere(2).unwrap(), 5)
            .unwrap()
            .mode_set(20)
            .unwrap();
        let x = Point::from([0.7, 1.1]);
        let mut v = vec![0.0; m.len()];
        m.eval_at(&x, &mut v);
        assert_eq!(mollified_values(&m, &Mollifier::Heat { t: 0.0 }, &x).unwrap(), v);
    }

    #[test]
    fn partition_matches_closed_form_cell_averages() {
        let model = ManifoldModel::torus(vec![1.0, 2.0]).unwrap();
        let m = GjmsSpectrum::of(&model, 3).unwrap().mode_set(20).unwrap();
        let cells = 4;
        let x = Point::from([0.3, 1.2]);
        let got = mollified_values(&m, &Mollifier::Partition { cells }, &x).unwrap();
        let sides = [1.0, 2.0];
        let centre: Vec<f64> = sides
            .iter()
            .zip(&x.coords)
            .map(|(l, c)| {
                let h = l / cells as f64;
                (c / h).floor() * h + 0.5 * h
            })
            .collect();
        let mut at_centre = vec![0.0; m.len()];
        m.eval_at(&Point::new(centre), &mut at_centre);
        for (j, mode) in m.modes().iter().enumerate() {
            let Mode::Torus { k, .. } = mode else { unreachable!() };
            let mut sinc = 1.0;
            for a in 0..2 {
                let z = PI * k[a] as f64 / cells as f64;
                if z != 0.0 {
                    sinc *= z.sin() / z;
                }
            }
            assert!((got[j] - at_centre[j] * sinc).abs() < 1e-6, "mode {mode}");
        }
    }

    #[test]
    fn small_ball_is_nearly_pointwise() {
        let model = ManifoldModel::unit_sphere(2).unwrap();
        let m = GjmsSpectrum::of(&model, 4).unwrap().mode_set(15).unwrap();
        let x = model.base_point();
        let q = mollified_values(&m, &Mollifier::Ball { radius: 1e-3 }, &x).unwrap();
        let mut v = vec![0.0; m.len()];
        m.eval_at(&x, &mut v);
        for (a, b) in q.iter().zip(&v) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn mollified_covariance_bounded_by_diagonal() {
        let model = ManifoldModel::unit_sphere(2).unwrap();
        let m = GjmsSpectrum::of(&model, 6).unwrap().mode_set(35).unwrap();
        let q = Mollifier::Ball { radius: 0.3 };
        let x = model.base_point();
        let y = model.point_at_distance(&x, 0.4);
        let kxy = mollified_covariance(&m, &q, &x, &y).unwrap();
        let kyx = mollified_covariance(&m, &q, &y, &x).unwrap();
        let kxx = mollified_covariance(&m, &q, &x, &x).unwrap();
        assert!((kxy - kyx).abs() < 1e-14);
        assert!(kxy <= kxx);
    }
}
