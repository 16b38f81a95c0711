use std::cmp::Ordering;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{sphere, torus, ManifoldKind, ManifoldModel, Point};
use crate::error::{LqgError, Result};
use crate::special::{gegenbauer_ratio, spherical_harmonic_dimension, unit_sphere_volume};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FourierPart {
    Const,
    Cos,
    Sin,
}

/// A single real orthonormal eigenfunction.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// Chain `l_1 ≥ … ≥ l_{n-1}` and signed azimuthal index `|m| ≤ l_{n-1}`.
    Sphere { chain: Vec<u32>, m: i32 },
    /// Half-lattice vector `k` (first nonzero entry positive) and its part.
    Torus { k: Vec<i32>, part: FourierPart },
    /// `(l, m)` harmonics of the two 2-sphere factors.
    Product { first: (u32, i32), second: (u32, i32) },
}

impl Mode {
    /// Degree on spheres, `max |k_i|` on tori, max factor degree on products.
    pub fn band(&self) -> usize {
        match self {
            Mode::Sphere { chain, .. } => chain[0] as usize,
            Mode::Torus { k, .. } => k.iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0),
            Mode::Product { first, second } => first.0.max(second.0) as usize,
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Mode::Sphere { chain, .. } => chain[0] == 0,
            Mode::Torus { part, .. } => *part == FourierPart::Const,
            Mode::Product { first, second } => first.0 == 0 && second.0 == 0,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Sphere { chain, m } => {
                write!(f, "Y[")?;
                for l in chain {
                    write!(f, "{l},")?;
                }
                write!(f, "{m}]")
            }
            Mode::Torus { k, part } => write!(f, "{part:?}{k:?}"),
            Mode::Product { first, second } => {
                write!(f, "Y[{},{}]xY[{},{}]", first.0, first.1, second.0, second.1)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EigenspaceLabel {
    Degree(u32),
    Lattice(Vec<i32>),
    Degrees(u32, u32),
}

impl fmt::Display for EigenspaceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EigenspaceLabel::Degree(l) => write!(f, "l={l}"),
            EigenspaceLabel::Lattice(k) => write!(f, "k={k:?}"),
            EigenspaceLabel::Degrees(a, b) => write!(f, "l=({a},{b})"),
        }
    }
}

/// One block of the spectrum. Tori list each half-lattice vector separately
/// (multiplicity 2, or 1 for `k = 0`), so several blocks may share an eigenvalue.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eigenspace {
    pub eigenvalue: f64,
    pub multiplicity: usize,
    pub label: EigenspaceLabel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaplaceSpectrum {
    model: ManifoldModel,
    cutoff: usize,
    entries: Vec<Eigenspace>,
}

impl LaplaceSpectrum {
    pub(crate) fn new(model: ManifoldModel, cutoff: usize) -> Result<Self> {
        if cutoff < 1 {
            return Err(LqgError::InvalidParameter("spectrum cutoff must be ≥ 1".into()));
        }
        let mut entries = Vec::new();
        match model.kind() {
            ManifoldKind::Sphere { n, radius } => {
                let r2 = radius * radius;
                for l in 0..=cutoff {
                    entries.push(Eigenspace {
                        eigenvalue: (l * (l + n - 1)) as f64 / r2,
                        multiplicity: spherical_harmonic_dimension(*n, l),
                        label: EigenspaceLabel::Degree(l as u32),
                    });
                }
            }
            ManifoldKind::FlatTorus { sides, .. } => {
                for k in torus::half_lattice_ball(sides.len(), cutoff) {
                    let lambda = torus::eigenvalue(sides, &k);
                    let multiplicity = if k.iter().all(|v| *v == 0) { 1 } else { 2 };
                    entries.push(Eigenspace {
                        eigenvalue: lambda,
                        multiplicity,
                        label: EigenspaceLabel::Lattice(k),
                    });
                }
            }
            ManifoldKind::ProductSurfaces {
                curvature_1,
                curvature_2,
            } => {
                for l1 in 0..=cutoff {
                    for l2 in 0..=cutoff {
                        entries.push(Eigenspace {
                            eigenvalue: curvature_1 * (l1 * (l1 + 1)) as f64
                                + curvature_2 * (l2 * (l2 + 1)) as f64,
                            multiplicity: (2 * l1 + 1) * (2 * l2 + 1),
                            label: EigenspaceLabel::Degrees(l1 as u32, l2 as u32),
                        });
                    }
                }
            }
        }
        entries.sort_by(|a, b| {
            a.eigenvalue
                .partial_cmp(&b.eigenvalue)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.label.cmp(&b.label))
        });
        Ok(Self {
            model,
            cutoff,
            entries,
        })
    }

    pub fn model(&self) -> &ManifoldModel {
        &self.model
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn entries(&self) -> &[Eigenspace] {
        &self.entries
    }

    /// Total number of eigenfunctions, counted with multiplicity.
    pub fn mode_count(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    /// First positive eigenvalue.
    pub fn lambda_1(&self) -> f64 {
        self.entries[1].eigenvalue
    }

    /// Orthonormal eigenfunctions spanning entry `i`, in descriptor order.
    pub fn entry_modes(&self, i: usize) -> Vec<Mode> {
        match &self.entries[i].label {
            EigenspaceLabel::Degree(l) => {
                sphere::modes_of_degree(self.model.dimension(), *l as usize)
            }
            EigenspaceLabel::Lattice(k) => {
                if k.iter().all(|v| *v == 0) {
                    vec![Mode::Torus {
                        k: k.clone(),
                        part: FourierPart::Const,
                    }]
                } else {
                    vec![
                        Mode::Torus {
                            k: k.clone(),
                            part: FourierPart::Cos,
                        },
                        Mode::Torus {
                            k: k.clone(),
                            part: FourierPart::Sin,
                        },
                    ]
                }
            }
            EigenspaceLabel::Degrees(l1, l2) => {
                let mut out = Vec::new();
                let (a, b) = (*l1 as i32, *l2 as i32);
                for m1 in -a..=a {
                    for m2 in -b..=b {
                        out.push(Mode::Product {
                            first: (*l1, m1),
                            second: (*l2, m2),
                        });
                    }
                }
                out
            }
        }
    }

    /// The first `count` eigenfunctions in spectral order (constant first),
    /// paired with their eigenvalue and entry index.
    pub fn leading_modes(&self, count: usize) -> Result<Vec<(Mode, f64, usize)>> {
        let mut out = Vec::with_capacity(count);
        for (i, e) in self.entries.iter().enumerate() {
            if out.len() >= count {
                break;
            }
            for m in self.entry_modes(i) {
                if out.len() >= count {
                    break;
                }
                out.push((m, e.eigenvalue, i));
            }
        }
        if out.len() < count {
            return Err(LqgError::InvalidParameter(format!(
                "spectrum with cutoff {} has only {} modes (requested {count})",
                self.cutoff,
                out.len()
            )));
        }
        Ok(out)
    }

    /// `Σ_{modes in entry} ψ(x) ψ(y)` for every entry, via the addition theorem.
    pub fn zonal_sums(&self, x: &Point, y: &Point) -> Vec<f64> {
        match self.model.kind() {
            ManifoldKind::Sphere { radius, .. } => {
                let d = self.model.distance(x, y) / radius;
                self.sphere_zonal(d)
            }
            ManifoldKind::FlatTorus { sides, .. } => {
                let v = self.model.volume();
                let diff: Vec<f64> = x.coords.iter().zip(&y.coords).map(|(a, b)| a - b).collect();
                self.entries
                    .iter()
                    .map(|e| match &e.label {
                        EigenspaceLabel::Lattice(k) => {
                            if e.multiplicity == 1 {
                                1.0 / v
                            } else {
                                2.0 / v * torus::phase(sides, k, &diff).cos()
                            }
                        }
                        _ => unreachable!(),
                    })
                    .collect()
            }
            ManifoldKind::ProductSurfaces {
                curvature_1,
                curvature_2,
            } => {
                let t1 = sphere::angle_between(
                    &sphere::embed(&x.coords[..2]),
                    &sphere::embed(&y.coords[..2]),
                )
                .cos();
                let t2 = sphere::angle_between(
                    &sphere::embed(&x.coords[2..]),
                    &sphere::embed(&y.coords[2..]),
                )
                .cos();
                let mut r1 = Vec::new();
                let mut r2 = Vec::new();
                gegenbauer_ratio(0.5, self.cutoff, t1, &mut r1);
                gegenbauer_ratio(0.5, self.cutoff, t2, &mut r2);
                let v1 = 4.0 * std::f64::consts::PI / curvature_1;
                let v2 = 4.0 * std::f64::consts::PI / curvature_2;
                self.entries
                    .iter()
                    .map(|e| match e.label {
                        EigenspaceLabel::Degrees(a, b) => {
                            let (a, b) = (a as usize, b as usize);
                            (2 * a + 1) as f64 / v1 * r1[a] * (2 * b + 1) as f64 / v2 * r2[b]
                        }
                        _ => unreachable!(),
                    })
                    .collect()
            }
        }
    }

    /// Zonal sums on a sphere as functions of the geodesic distance `d`
    /// (in units of the radius). Entry order equals degree order.
    pub fn sphere_zonal(&self, angle: f64) -> Vec<f64> {
        let (n, radius) = match self.model.kind() {
            ManifoldKind::Sphere { n, radius } => (*n, *radius),
            _ => panic!("sphere_zonal on a non-sphere"),
        };
        let vol = unit_sphere_volume(n) * radius.powi(n as i32);
        let mut ratios = Vec::new();
        gegenbauer_ratio(0.5 * (n as f64 - 1.0), self.cutoff, angle.cos(), &mut ratios);
        self.entries
            .iter()
            .zip(&ratios)
            .map(|(e, r)| e.multiplicity as f64 / vol * r)
            .collect()
    }

    /// CSV dump: `mode_index, eigenvalue, multiplicity, descriptor`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["mode_index", "eigenvalue", "multiplicity", "descriptor"])?;
        for (i, e) in self.entries.iter().enumerate() {
            out.write_record([
                i.to_string(),
                format!("{:.17e}", e.eigenvalue),
                e.multiplicity.to_string(),
                e.label.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_spectra() {
        let s2 = ManifoldModel::unit_sphere(2).unwrap().laplace_spectrum(5).unwrap();
        assert_eq!(s2.entries()[0].eigenvalue, 0.0);
        assert_eq!(s2.entries()[0].multiplicity, 1);
        assert_eq!(s2.entries()[1].eigenvalue, 2.0);
        assert_eq!(s2.entries()[1].multiplicity, 3);
        let s4 = ManifoldModel::unit_sphere(4).unwrap().laplace_spectrum(3).unwrap();
        assert_eq!(s4.entries()[1].eigenvalue, 4.0);
        assert_eq!(s4.entries()[1].multiplicity, 5);
        assert_eq!(s4.entries()[2].multiplicity, 14);
    }

    #[test]
    fn torus_spectrum() {
        let t = ManifoldModel::torus(vec![2.0 * PI, 2.0 * PI])
            .unwrap()
            .laplace_spectrum(3)
            .unwrap();
        let e = &t.entries()[1];
        assert!((e.eigenvalue - 1.0).abs() < 1e-14);
        assert_eq!(e.multiplicity, 2);
        // |k| ≤ 3 lattice points: 29, all counted once through the half lattice
        assert_eq!(t.mode_count(), 29);
        for w in t.entries().windows(2) {
            assert!(w[0].eigenvalue <= w[1].eigenvalue);
        }
    }

    #[test]
    fn leading_modes_start_with_constant() {
        let s2 = ManifoldModel::unit_sphere(2).unwrap().laplace_spectrum(4).unwrap();
        let m = s2.leading_modes(10).unwrap();
        assert!(m[0].0.is_constant());
        assert_eq!(m[1].1, 2.0);
        assert_eq!(m[4].1, 6.0);
        assert!(s2.leading_modes(26).is_err());
    }

    #[test]
    fn zonal_sums_match_modewise_sums() {
        for model in [
            ManifoldModel::unit_sphere(2).unwrap(),
            ManifoldModel::sphere(4, 1.3).unwrap(),
            ManifoldModel::torus(vec![1.0, 2.0]).unwrap(),
            ManifoldModel::new(ManifoldKind::ProductSurfaces {
                curvature_1: 1.0,
                curvature_2: 2.0,
            })
            .unwrap(),
        ] {
            let spec = model.laplace_spectrum(3).unwrap();
            let x = model.base_point();
            let mut y = model.point_at_distance(&x, 0.7);
            for c in y.coords.iter_mut() {
                *c += 0.1;
            }
            let zonal = spec.zonal_sums(&x, &y);
            for (i, z) in zonal.iter().enumerate() {
                let modes = spec.entry_modes(i);
                let mut vx = vec![0.0; modes.len()];
                let mut vy = vec![0.0; modes.len()];
                model.eigenfunctions_at(&modes, &x, &mut vx);
                model.eigenfunctions_at(&modes, &y, &mut vy);
                let s: f64 = vx.iter().zip(&vy).map(|(a, b)| a * b).sum();
                assert!((s - z).abs() < 1e-12, "{model} entry {i}: {s} vs {z}");
            }
        }
    }
}
