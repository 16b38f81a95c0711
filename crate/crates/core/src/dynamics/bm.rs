//! Brownian motion with generator `Δ` (not `Δ/2`): flat increments have
//! variance `2δt` per axis.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cgf::RngStream;
use crate::error::{LqgError, Result};
use crate::manifolds::{sphere, ManifoldKind, ManifoldModel, Point};

/// A discretely sampled path. Positions are stored in ambient coordinates:
/// unwrapped coordinates on tori, embedding vectors on spheres (and the
/// concatenation of both factor embeddings on products).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrownianPath {
    pub kind: ManifoldKind,
    pub times: Vec<f64>,
    pub ambient: Vec<Vec<f64>>,
}

fn sphere_step(e: &mut [f64], scale: f64, rng: &mut RngStream) {
    let z = rng.normals(e.len());
    let dot: f64 = z.iter().zip(e.iter()).map(|(a, b)| a * b).sum();
    let v: Vec<f64> = z.iter().zip(e.iter()).map(|(a, b)| scale * (a - dot * b)).collect();
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    let (c, s) = (norm.cos(), norm.sin());
    let mut n2 = 0.0;
    for (ek, vk) in e.iter_mut().zip(&v) {
        *ek = c * *ek + s * vk / norm;
        n2 += *ek * *ek;
    }
    let n = n2.sqrt();
    for ek in e.iter_mut() {
        *ek /= n;
    }
}

/// Exact Gaussian increments on tori, geodesic random walk on spheres.
pub fn simulate_bm(model: &ManifoldModel, x0: &Point, horizon: f64, dt: f64, rng: &mut RngStream) -> Result<BrownianPath> {
    if !(dt > 0.0 && horizon > 0.0) {
        return Err(LqgError::InvalidParameter("need δt > 0 and T > 0".into()));
    }
    let steps = (horizon / dt).round() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut ambient = Vec::with_capacity(steps + 1);
    let mut cur = to_ambient(model, x0);
    let sd = (2.0 * dt).sqrt();
    times.push(0.0);
    ambient.push(cur.clone());
    for k in 1..=steps {
        match model.kind() {
            ManifoldKind::FlatTorus { .. } => {
                for c in cur.iter_mut() {
                    *c += sd * rng.normal();
                }
            }
            ManifoldKind::Sphere { radius, .. } => sphere_step(&mut cur, sd / radius, rng),
            ManifoldKind::ProductSurfaces {
                curvature_1,
                curvature_2,
            } => {
                sphere_step(&mut cur[..3], sd * curvature_1.sqrt(), rng);
                sphere_step(&mut cur[3..], sd * curvature_2.sqrt(), rng);
            }
        }
        times.push(k as f64 * dt);
        ambient.push(cur.clone());
    }
    Ok(BrownianPath {
        kind: model.kind().clone(),
        times,
        ambient,
    })
}

pub(crate) fn to_ambient(model: &ManifoldModel, x: &Point) -> Vec<f64> {
    match model.kind() {
        ManifoldKind::FlatTorus { .. } => x.coords.clone(),
        ManifoldKind::Sphere { .. } => sphere::embed(&x.coords),
        ManifoldKind::ProductSurfaces { .. } => {
            let mut v = sphere::embed(&x.coords[..2]);
            v.extend(sphere::embed(&x.coords[2..]));
            v
        }
    }
}

/// Chart point of an ambient vector (sphere factors are renormalized).
pub(crate) fn from_ambient(kind: &ManifoldKind, v: &[f64]) -> Point {
    let unit = |w: &[f64]| -> Vec<f64> {
        let n = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        w.iter().map(|a| a / n).collect()
    };
    match kind {
        ManifoldKind::FlatTorus { sides, .. } => {
            Point::new(v.iter().zip(sides).map(|(c, l)| c.rem_euclid(*l)).collect())
        }
        ManifoldKind::Sphere { .. } => Point::new(sphere::chart_from_embedding(&unit(v))),
        ManifoldKind::ProductSurfaces { .. } => {
            let mut c = sphere::chart_from_embedding(&unit(&v[..3]));
            c.extend(sphere::chart_from_embedding(&unit(&v[3..])));
            Point::new(c)
        }
    }
}

impl BrownianPath {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn point(&self, k: usize) -> Point {
        from_ambient(&self.kind, &self.ambient[k])
    }

    pub fn points(&self) -> Vec<Point> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }

    /// CSV `t, c0..` in chart coordinates.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_path_csv(&self.times, &self.points(), w)
    }
}

pub(crate) fn write_path_csv<W: Write>(times: &[f64], points: &[Point], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let dim = points.first().map_or(0, |p| p.coords.len());
    let mut header = vec!["t".to_string()];
    header.extend((0..dim).map(|i| format!("c{i}")));
    out.write_record(&header)?;
    for (t, p) in times.iter().zip(points) {
        let mut row = vec![format!("{t:.17e}")];
        row.extend(p.coords.iter().map(|c| format!("{c:.17e}")));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Estimate;

    #[test]
    fn torus_mean_square_displacement() {
        let model = ManifoldModel::torus(vec![1.0, 1.0]).unwrap();
        let x0 = Point::from([0.1, 0.2]);
        let t = 0.5;
        let d2: Vec<f64> = (0..4000)
            .map(|i| {
                let p = simulate_bm(&model, &x0, t, 0.05, &mut RngStream::new(9, i)).unwrap();
                let last = p.ambient.last().unwrap();
                (last[0] - 0.1).powi(2) + (last[1] - 0.2).powi(2)
            })
            .collect();
        let e = Estimate::from_samples(&d2);
        assert!(e.within_sigma(4.0 * t, 4.0), "{e:?}");
    }

    #[test]
    fn sphere_path_stays_on_sphere() {
        let model = ManifoldModel::unit_sphere(2).unwrap();
        let p = simulate_bm(&model, &model.base_point(), 1.0, 0.01, &mut RngStream::new(1, 0)).unwrap();
        for v in &p.ambient {
            let n: f64 = v.iter().map(|a| a * a).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }
}
