use std::f64::consts::PI;
use std::io::Write;

use super::{ManifoldKind, ManifoldModel, Point};
use crate::error::{LqgError, Result};
use crate::special::gauss_jacobi_symmetric;

/// Tensor-product quadrature on a model manifold. Weights sum to the volume.
#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    points: Vec<Point>,
    weights: Vec<f64>,
    resolution: usize,
    band: usize,
}

impl QuadratureGrid {
    pub(crate) fn new(model: &ManifoldModel, resolution: usize) -> Result<Self> {
        if resolution < 1 {
            return Err(LqgError::InvalidParameter("grid resolution must be ≥ 1".into()));
        }
        let grid = match model.kind() {
            ManifoldKind::Sphere { n, radius } => {
                let (pts, w) = sphere_rule(*n, resolution);
                let scale = radius.powi(*n as i32);
                QuadratureGrid {
                    points: pts,
                    weights: w.into_iter().map(|v| v * scale).collect(),
                    resolution,
                    band: resolution,
                }
            }
            ManifoldKind::FlatTorus { sides, .. } => {
                let n = sides.len();
                let total = resolution.pow(n as u32);
                let cell: f64 = sides.iter().map(|l| l / resolution as f64).product();
                let mut points = Vec::with_capacity(total);
                let mut idx = vec![0usize; n];
                for _ in 0..total {
                    points.push(Point::new(
                        idx.iter()
                            .zip(sides)
                            .map(|(i, l)| *i as f64 * l / resolution as f64)
                            .collect(),
                    ));
                    for j in (0..n).rev() {
                        idx[j] += 1;
                        if idx[j] < resolution {
                            break;
                        }
                        idx[j] = 0;
                    }
                }
                QuadratureGrid {
                    points,
                    weights: vec![cell; total],
                    resolution,
                    band: (resolution - 1) / 2,
                }
            }
            ManifoldKind::ProductSurfaces {
                curvature_1,
                curvature_2,
            } => {
                let (p, w) = sphere_rule(2, resolution);
                let mut points = Vec::with_capacity(p.len() * p.len());
                let mut weights = Vec::with_capacity(p.len() * p.len());
                for (a, wa) in p.iter().zip(&w) {
                    for (b, wb) in p.iter().zip(&w) {
                        let mut c = a.coords.clone();
                        c.extend_from_slice(&b.coords);
                        points.push(Point::new(c));
                        weights.push(wa * wb / (curvature_1 * curvature_2));
                    }
                }
                QuadratureGrid {
                    points,
                    weights,
                    resolution,
                    band: resolution,
                }
            }
        };
        Ok(grid)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Products of two modes whose [`super::Mode::band`] is at most this value
    /// integrate exactly.
    pub fn band(&self) -> usize {
        self.band
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ w_i f(x_i)`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// CSV dump: `c0, c1, …, weight`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let dim = self.points.first().map_or(0, |p| p.coords.len());
        let mut header: Vec<String> = (0..dim).map(|i| format!("c{i}")).collect();
        header.push("weight".into());
        out.write_record(&header)?;
        for (p, wt) in self.points.iter().zip(&self.weights) {
            let mut row: Vec<String> = p.coords.iter().map(|c| format!("{c:.17e}")).collect();
            row.push(format!("{wt:.17e}"));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Unit-sphere rule: Gauss–Jacobi in `cos θ_k` with weight `(1-t²)^{(n-k-1)/2}`
/// and `2L+2` azimuths.
fn sphere_rule(n: usize, l: usize) -> (Vec<Point>, Vec<f64>) {
    let polar: Vec<(Vec<f64>, Vec<f64>)> = (1..n)
        .map(|k| {
            let (t, w) = gauss_jacobi_symmetric(l + 1, 0.5 * (n - k - 1) as f64);
            (t.iter().map(|c| c.clamp(-1.0, 1.0).acos()).collect(), w)
        })
        .collect();
    let nphi = 2 * l + 2;
    let wphi = 2.0 * PI / nphi as f64;
    let per_axis = l + 1;
    let total = per_axis.pow((n - 1) as u32) * nphi;
    let mut points = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; n - 1];
    loop {
        let mut w = wphi;
        let mut angles = Vec::with_capacity(n);
        for (k, &i) in idx.iter().enumerate() {
            angles.push(polar[k].0[i]);
            w *= polar[k].1[i];
        }
        for j in 0..nphi {
            let mut c = angles.clone();
            c.push(j as f64 * wphi);
            points.push(Point::new(c));
            weights.push(w);
        }
        let mut k = n - 1;
        loop {
            if k == 0 {
                debug_assert_eq!(points.len(), total);
                return (points, weights);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::Mode;

    fn gram_error(model: &ManifoldModel, grid: &QuadratureGrid, modes: &[Mode]) -> f64 {
        let m = modes.len();
        let mut g = vec![0.0; m * m];
        let mut vals = vec![0.0; m];
        for (p, w) in grid.points().iter().zip(grid.weights()) {
            model.eigenfunctions_at(modes, p, &mut vals);
            for i in 0..m {
                for j in 0..m {
                    g[i * m + j] += w * vals[i] * vals[j];
                }
            }
        }
        let mut err: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((g[i * m + j] - target).abs());
            }
        }
        err
    }

    #[test]
    fn weights_sum_to_volume() {
        for model in [
            ManifoldModel::unit_sphere(2).unwrap(),
            ManifoldModel::unit_sphere(4).unwrap(),
            ManifoldModel::sphere(6, 0.7).unwrap(),
            ManifoldModel::torus(vec![1.0, 3.0]).unwrap(),
            ManifoldModel::new(ManifoldKind::ProductSurfaces {
                curvature_1: 1.0,
                curvature_2: 3.0,
            })
            .unwrap(),
        ] {
            let g = model.quadrature(4).unwrap();
            let rel = (g.total_weight() - model.volume()).abs() / model.volume();
            assert!(rel < 1e-12, "{model}: {rel}");
        }
    }

    #[test]
    fn orthonormality_on_grids() {
        for (model, band) in [
            (ManifoldModel::unit_sphere(2).unwrap(), 5),
            (ManifoldModel::sphere(4, 1.2).unwrap(), 3),
            (ManifoldModel::torus(vec![2.0, 1.0]).unwrap(), 3),
            (
                ManifoldModel::new(ManifoldKind::ProductSurfaces {
                    curvature_1: 1.0,
                    curvature_2: 2.0,
                })
                .unwrap(),
                2,
            ),
        ] {
            let spec = model.laplace_spectrum(band).unwrap();
            let modes: Vec<Mode> = spec
                .leading_modes(spec.mode_count())
                .unwrap()
                .into_iter()
                .map(|m| m.0)
                .filter(|m| m.band() <= band)
                .collect();
            let grid = model.quadrature_for_band(band).unwrap();
            let e = gram_error(&model, &grid, &modes);
            assert!(e < 1e-12, "{model}: {e}");
        }
    }
}
