//! Model manifolds with closed-form geometry and Laplace spectra.
//!
//! Three families are supported: round spheres `S^n(r)`, flat tori
//! `R^n / ∏ L_i Z` and products of two round 2-spheres. All dimensions are
//! even. Hyperbolic data enters only through [`admissibility`].

pub mod admissibility;
mod quadrature;
pub(crate) mod sphere;
mod spectrum;
mod torus;

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LqgError, Result};
use crate::special::unit_sphere_volume;

pub use admissibility::{admissibility_verdict, product_counterexample_spectrum, Verdict};
pub use quadrature::QuadratureGrid;
pub use spectrum::{Eigenspace, EigenspaceLabel, FourierPart, LaplaceSpectrum, Mode};

/// Descriptor from which a [`ManifoldModel`] is built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ManifoldKind {
    Sphere { n: usize, radius: f64 },
    FlatTorus { n: usize, sides: Vec<f64> },
    /// `S²(1/√k₁) × S²(1/√k₂)`; both curvatures must be positive.
    ProductSurfaces { curvature_1: f64, curvature_2: f64 },
}

impl ManifoldKind {
    pub fn unit_sphere(n: usize) -> Self {
        ManifoldKind::Sphere { n, radius: 1.0 }
    }

    pub fn square_torus(n: usize, side: f64) -> Self {
        ManifoldKind::FlatTorus {
            n,
            sides: vec![side; n],
        }
    }
}

/// A point in chart coordinates.
///
/// Spheres use `(θ_1, …, θ_{n-1}, φ)`, tori use `x_i ∈ [0, L_i)`, products of
/// spheres concatenate `(θ, φ)` for each factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Self { coords }
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(coords: [f64; N]) -> Self {
        Self {
            coords: coords.to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifoldModel {
    kind: ManifoldKind,
    dimension: usize,
    einstein_constant: Option<f64>,
}

/// Validate a descriptor and attach geometry.
pub fn build_manifold(kind: ManifoldKind) -> Result<ManifoldModel> {
    ManifoldModel::new(kind)
}

impl ManifoldModel {
    pub fn new(kind: ManifoldKind) -> Result<Self> {
        let (dimension, einstein_constant) = match &kind {
            ManifoldKind::Sphere { n, radius } => {
                check_even(*n)?;
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(LqgError::InvalidParameter(format!(
                        "sphere radius must be positive (got {radius})"
                    )));
                }
                (*n, Some((*n as f64 - 1.0) / (radius * radius)))
            }
            ManifoldKind::FlatTorus { n, sides } => {
                check_even(*n)?;
                if sides.len() != *n {
                    return Err(LqgError::InvalidParameter(format!(
                        "torus of dimension {n} needs {n} side lengths (got {})",
                        sides.len()
                    )));
                }
                if sides.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
                    return Err(LqgError::InvalidParameter(
                        "torus side lengths must be positive".into(),
                    ));
                }
                (*n, Some(0.0))
            }
            ManifoldKind::ProductSurfaces {
                curvature_1,
                curvature_2,
            } => {
                if !(*curvature_1 > 0.0 && *curvature_2 > 0.0) {
                    return Err(LqgError::Unsupported(
                        "explicit spectra exist only for sphere factors; pass λ₁ to the \
                         admissibility calculator for flat or hyperbolic factors"
                            .into(),
                    ));
                }
                let k = if curvature_1 == curvature_2 {
                    Some(*curvature_1)
                } else {
                    None
                };
                (4, k)
            }
        };
        Ok(Self {
            kind,
            dimension,
            einstein_constant,
        })
    }

    pub fn sphere(n: usize, radius: f64) -> Result<Self> {
        Self::new(ManifoldKind::Sphere { n, radius })
    }

    pub fn unit_sphere(n: usize) -> Result<Self> {
        Self::sphere(n, 1.0)
    }

    pub fn torus(sides: Vec<f64>) -> Result<Self> {
        Self::new(ManifoldKind::FlatTorus {
            n: sides.len(),
            sides,
        })
    }

    pub fn kind(&self) -> &ManifoldKind {
        &self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// `k` with `Ric = k g`, or `None` when the model is not Einstein.
    pub fn einstein_constant(&self) -> Option<f64> {
        self.einstein_constant
    }

    pub fn volume(&self) -> f64 {
        match &self.kind {
            ManifoldKind::Sphere { n, radius } => unit_sphere_volume(*n) * radius.powi(*n as i32),
            ManifoldKind::FlatTorus { sides, .. } => sides.iter().product(),
            ManifoldKind::ProductSurfaces {
                curvature_1,
                curvature_2,
            } => (4.0 * PI / curvature_1) * (4.0 * PI / curvature_2),
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.kind {
            ManifoldKind::Sphere { radius, .. } => PI * radius,
            ManifoldKind::FlatTorus { sides, .. } => {
                0.5 * sides.iter().map(|s| s * s).sum::<f64>().sqrt()
            }
            ManifoldKind::ProductSurfaces {
                curvature_1,
                curvature_2,
            } => PI * (1.0 / curvature_1 + 1.0 / curvature_2).sqrt(),
        }
    }

    /// Euler characteristic.
    pub fn euler_characteristic(&self) -> i64 {
        match &self.kind {
            ManifoldKind::Sphere { .. } => 2,
            ManifoldKind::FlatTorus { .. } => 0,
            ManifoldKind::ProductSurfaces { .. } => 4,
        }
    }

    /// Riemannian distance.
    pub fn distance(&self, x: &Point, y: &Point) -> f64 {
        match &self.kind {
            ManifoldKind::Sphere { radius, .. } => {
                radius * sphere::angle_between(&sphere::embed(&x.coords), &sphere::embed(&y.coords))
            }
            ManifoldKind::FlatTorus { sides, .. } => torus::distance(sides, &x.coords, &y.coords),
            ManifoldKind::ProductSurfaces {
                curvature_1,
                curvature_2,
            } => {
                let d1 = sphere::angle_between(
                    &sphere::embed(&x.coords[..2]),
                    &sphere::embed(&y.coords[..2]),
                ) / curvature_1.sqrt();
                let d2 = sphere::angle_between(
                    &sphere::embed(&x.coords[2..]),
                    &sphere::embed(&y.coords[2..]),
                ) / curvature_2.sqrt();
                (d1 * d1 + d2 * d2).sqrt()
            }
        }
    }

    /// Unit-sphere embedding of a sphere point in `R^{n+1}`.
    pub fn embed(&self, x: &Point) -> Option<Vec<f64>> {
        match &self.kind {
            ManifoldKind::Sphere { .. } => Some(sphere::embed(&x.coords)),
            _ => None,
        }
    }

    /// Inverse of [`ManifoldModel::embed`]; the argument is normalized first.
    pub fn point_from_embedding(&self, v: &[f64]) -> Option<Point> {
        match &self.kind {
            ManifoldKind::Sphere { n, .. } if v.len() == n + 1 => {
                let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                let u: Vec<f64> = v.iter().map(|a| a / norm).collect();
                Some(Point::new(sphere::chart_from_embedding(&u)))
            }
            _ => None,
        }
    }

    /// A point at distance `d` from `x`, used for kernel ladders.
    ///
    /// Spheres move along the first polar angle, tori along the first axis,
    /// products along the first factor.
    pub fn point_at_distance(&self, x: &Point, d: f64) -> Point {
        match &self.kind {
            ManifoldKind::Sphere { radius, .. } => {
                let e = sphere::embed(&x.coords);
                // any unit tangent vector at e
                let mut t = vec![0.0; e.len()];
                let i = if e[0].abs() < 0.9 { 0 } else { 1 };
                t[i] = 1.0;
                let dot = e[i];
                for (tk, ek) in t.iter_mut().zip(&e) {
                    *tk -= dot * ek;
                }
                let tn = t.iter().map(|a| a * a).sum::<f64>().sqrt();
                let a = d / radius;
                let y: Vec<f64> = e
                    .iter()
                    .zip(&t)
                    .map(|(ek, tk)| a.cos() * ek + a.sin() * tk / tn)
                    .collect();
                Point::new(sphere::chart_from_embedding(&y))
            }
            ManifoldKind::FlatTorus { sides, .. } => {
                let mut c = x.coords.clone();
                c[0] = (c[0] + d).rem_euclid(sides[0]);
                Point::new(c)
            }
            ManifoldKind::ProductSurfaces { curvature_1, .. } => {
                let s1 = ManifoldModel::sphere(2, 1.0 / curvature_1.sqrt()).unwrap();
                let first = s1.point_at_distance(&Point::new(x.coords[..2].to_vec()), d);
                let mut c = first.coords;
                c.extend_from_slice(&x.coords[2..]);
                Point::new(c)
            }
        }
    }

    /// A reference point away from chart singularities.
    pub fn base_point(&self) -> Point {
        match &self.kind {
            ManifoldKind::Sphere { n, .. } => {
                let mut c = vec![0.5 * PI; *n];
                c[n - 1] = 0.3;
                Point::new(c)
            }
            ManifoldKind::FlatTorus { n, .. } => Point::new(vec![0.0; *n]),
            ManifoldKind::ProductSurfaces { .. } => Point::new(vec![0.5 * PI, 0.3, 0.5 * PI, 0.3]),
        }
    }

    /// Uniformly distributed point from i.i.d. standard normals
    /// (normalized Gaussian direction on spheres, normal CDF on tori).
    pub fn uniform_point_from_normals(&self, normals: &[f64]) -> Point {
        match &self.kind {
            ManifoldKind::Sphere { n, .. } => {
                let v = &normals[..n + 1];
                self.point_from_embedding(v).unwrap()
            }
            ManifoldKind::FlatTorus { sides, .. } => {
                // normals interpreted through the standard normal CDF
                let c = sides
                    .iter()
                    .zip(normals)
                    .map(|(l, z)| l * crate::stats::normal_cdf(*z))
                    .collect();
                Point::new(c)
            }
            ManifoldKind::ProductSurfaces { .. } => {
                let a = sphere::chart_from_embedding(&unit(&normals[..3]));
                let b = sphere::chart_from_embedding(&unit(&normals[3..6]));
                Point::new(a.into_iter().chain(b).collect())
            }
        }
    }

    /// How many standard normals [`ManifoldModel::uniform_point_from_normals`] consumes.
    pub fn normals_per_point(&self) -> usize {
        match &self.kind {
            ManifoldKind::Sphere { n, .. } => n + 1,
            ManifoldKind::FlatTorus { n, .. } => *n,
            ManifoldKind::ProductSurfaces { .. } => 6,
        }
    }

    /// Closed-form Laplace spectrum up to the given mode-index cutoff
    /// (degree for spheres, Euclidean lattice radius for tori).
    pub fn laplace_spectrum(&self, cutoff: usize) -> Result<LaplaceSpectrum> {
        LaplaceSpectrum::new(self.clone(), cutoff)
    }

    /// Value of the orthonormal eigenfunction `mode` at `x`.
    pub fn eigenfunction(&self, mode: &Mode, x: &Point) -> f64 {
        let mut out = [0.0];
        self.eigenfunctions_at(std::slice::from_ref(mode), x, &mut out);
        out[0]
    }

    /// Evaluate several eigenfunctions at one point, sharing per-point tables.
    pub fn eigenfunctions_at(&self, modes: &[Mode], x: &Point, out: &mut [f64]) {
        assert_eq!(modes.len(), out.len());
        match &self.kind {
            ManifoldKind::Sphere { n, radius } => {
                let lmax = modes.iter().map(Mode::band).max().unwrap_or(0);
                let tables = sphere::FactorTables::new(*n, lmax, &x.coords);
                let scale = radius.powf(-0.5 * *n as f64);
                for (o, m) in out.iter_mut().zip(modes) {
                    match m {
                        Mode::Sphere { chain, m } => *o = scale * tables.eval(chain, *m),
                        _ => panic!("mode {m} does not belong to a sphere"),
                    }
                }
            }
            ManifoldKind::FlatTorus { sides, .. } => {
                let kmax = modes.iter().map(Mode::band).max().unwrap_or(0);
                let phases = torus::PhaseTable::new(sides, kmax, &x.coords);
                for (o, m) in out.iter_mut().zip(modes) {
                    match m {
                        Mode::Torus { k, part } => *o = phases.eval(k, *part),
                        _ => panic!("mode {m} does not belong to a torus"),
                    }
                }
            }
            ManifoldKind::ProductSurfaces {
                curvature_1,
                curvature_2,
            } => {
                let lmax = modes.iter().map(Mode::band).max().unwrap_or(0);
                let t1 = sphere::FactorTables::new(2, lmax, &x.coords[..2]);
                let t2 = sphere::FactorTables::new(2, lmax, &x.coords[2..]);
                let scale = (curvature_1 * curvature_2).sqrt();
                for (o, m) in out.iter_mut().zip(modes) {
                    match m {
                        Mode::Product { first, second } => {
                            *o = scale
                                * t1.eval(&[first.0], first.1)
                                * t2.eval(&[second.0], second.1)
                        }
                        _ => panic!("mode {m} does not belong to a product of spheres"),
                    }
                }
            }
        }
    }

    /// Quadrature grid at the given resolution.
    ///
    /// Spheres: Gauss–Jacobi in each `cos θ_k` with `resolution + 1` nodes and
    /// `2·resolution + 2` uniform azimuths, exact for products of two
    /// harmonics of degree ≤ `resolution`. Tori: `resolution` uniform nodes per
    /// axis, exact for products of modes with `|k_i| ≤ (resolution - 1)/2`.
    pub fn quadrature(&self, resolution: usize) -> Result<QuadratureGrid> {
        QuadratureGrid::new(self, resolution)
    }

    /// Smallest grid on which products of modes with [`Mode::band`] ≤ `band`
    /// integrate exactly.
    pub fn quadrature_for_band(&self, band: usize) -> Result<QuadratureGrid> {
        let resolution = match &self.kind {
            ManifoldKind::FlatTorus { .. } => 2 * band + 1,
            _ => band.max(1),
        };
        self.quadrature(resolution)
    }
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.iter().map(|a| a / n).collect()
}

fn check_even(n: usize) -> Result<()> {
    if n < 2 || n % 2 != 0 {
        Err(LqgError::OddDimension(n))
    } else {
        Ok(())
    }
}

impl fmt::Display for ManifoldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ManifoldKind::Sphere { n, radius } if *radius == 1.0 => write!(f, "S^{n}"),
            ManifoldKind::Sphere { n, radius } => write!(f, "S^{n}(r={radius})"),
            ManifoldKind::FlatTorus { n, sides } => write!(f, "T^{n}{sides:?}"),
            ManifoldKind::ProductSurfaces {
                curvature_1,
                curvature_2,
            } => write!(f, "S^2(k={curvature_1}) x S^2(k={curvature_2})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volumes() {
        let s2 = ManifoldModel::unit_sphere(2).unwrap();
        assert!((s2.volume() - 4.0 * PI).abs() < 1e-13);
        let s4 = ManifoldModel::unit_sphere(4).unwrap();
        assert!((s4.volume() - 8.0 * PI * PI / 3.0).abs() < 1e-12);
        let t2 = ManifoldModel::torus(vec![2.0 * PI, 2.0 * PI]).unwrap();
        assert!((t2.volume() - 4.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn odd_dimension_rejected() {
        let err = ManifoldModel::unit_sphere(3).unwrap_err();
        assert!(err.to_string().contains("even dimension required"));
        assert!(ManifoldModel::torus(vec![1.0; 3]).is_err());
    }

    #[test]
    fn einstein_constants() {
        let s4 = ManifoldModel::sphere(4, 2.0).unwrap();
        assert!((s4.einstein_constant().unwrap() - 0.75).abs() < 1e-15);
        let t = ManifoldModel::torus(vec![1.0, 2.0]).unwrap();
        assert_eq!(t.einstein_constant(), Some(0.0));
        let p = ManifoldModel::new(ManifoldKind::ProductSurfaces {
            curvature_1: 1.0,
            curvature_2: 2.0,
        })
        .unwrap();
        assert_eq!(p.einstein_constant(), None);
    }

    #[test]
    fn distances() {
        let s2 = ManifoldModel::unit_sphere(2).unwrap();
        let north = Point::from([0.0, 0.0]);
        let south = Point::from([PI, 0.0]);
        assert!((s2.distance(&north, &south) - PI).abs() < 1e-14);
        let t = ManifoldModel::torus(vec![1.0, 1.0]).unwrap();
        let o = Point::from([0.0, 0.0]);
        assert!((t.distance(&o, &Point::from([0.5, 0.0])) - 0.5).abs() < 1e-15);
        assert!((t.distance(&o, &Point::from([0.9, 0.0])) - 0.1).abs() < 1e-14);
    }

    #[test]
    fn point_at_distance_is_exact() {
        for m in [
            ManifoldModel::unit_sphere(2).unwrap(),
            ManifoldModel::sphere(4, 1.5).unwrap(),
            ManifoldModel::torus(vec![3.0, 3.0]).unwrap(),
        ] {
            let x = m.base_point();
            for d in [0.01, 0.3, 1.2] {
                let y = m.point_at_distance(&x, d);
                assert!((m.distance(&x, &y) - d).abs() < 1e-12, "{m} d={d}");
            }
        }
    }
}
