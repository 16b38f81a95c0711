//! Liouville Brownian motion: additive functional, time change and the
//! Revuz correspondence.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bm::{from_ambient, simulate_bm, write_path_csv, BrownianPath};
use crate::cgf::{derive_seed, purpose, sample_field_at, FieldSample, RngStream};
use crate::error::{LqgError, Result};
use crate::manifolds::{ManifoldKind, Point, QuadratureGrid};
use crate::spectral::ModeSet;
use crate::stats::Estimate;

/// `exp(γ h_ℓ(x) − γ²/2 k_ℓ(x,x))`.
pub fn liouville_density(sample: &FieldSample, gamma: f64, x: &Point) -> f64 {
    if gamma == 0.0 {
        return 1.0;
    }
    let modes = sample.modes();
    let mut v = vec![0.0; modes.len()];
    modes.eval_at(x, &mut v);
    let c = sample.coefficients();
    let nu = modes.nu();
    let (mut h, mut k) = (0.0, 0.0);
    for j in 1..v.len() {
        h += c[j] * v[j];
        k += v[j] * v[j] / nu[j];
    }
    k /= modes.a_n();
    (gamma * h - 0.5 * gamma * gamma * k).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdditiveFunctional {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub gamma: f64,
    pub ell: usize,
    /// `|γ| ≥ 2`, outside the Dirichlet-form regime.
    pub flagged: bool,
}

fn trapezoid_cumulative(times: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..f.len() {
        acc += 0.5 * (times[k] - times[k - 1]) * (f[k] + f[k - 1]);
        out.push(acc);
    }
    out
}

pub fn additive_functional(path: &BrownianPath, sample: &FieldSample, gamma: f64) -> AdditiveFunctional {
    let f: Vec<f64> = path.points().iter().map(|x| liouville_density(sample, gamma, x)).collect();
    AdditiveFunctional {
        values: trapezoid_cumulative(&path.times, &f),
        times: path.times.clone(),
        gamma,
        ell: sample.ell(),
        flagged: gamma.abs() >= 2.0,
    }
}

impl AdditiveFunctional {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "A"])?;
        for (t, a) in self.times.iter().zip(&self.values) {
            out.write_record([format!("{t:.17e}"), format!("{a:.17e}")])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LbmPath {
    pub times: Vec<f64>,
    pub tau: Vec<f64>,
    pub positions: Vec<Point>,
    /// The requested horizon exceeded `A(T)`.
    pub truncated: bool,
}

impl LbmPath {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_path_csv(&self.times, &self.positions, w)
    }
}

/// `X_t = B_{τ_t}` on the grid `0, δ, 2δ, … ≤ horizon`, with `τ` the
/// piecewise-linear inverse of `A`.
pub fn time_change(path: &BrownianPath, a: &AdditiveFunctional, horizon: f64, out_dt: f64) -> Result<LbmPath> {
    if !(out_dt > 0.0) || path.len() != a.values.len() {
        return Err(LqgError::InvalidParameter("bad time-change grid".into()));
    }
    let total = *a.values.last().unwrap();
    let truncated = horizon > total;
    let end = horizon.min(total);
    let count = (end / out_dt + 1e-9).floor() as usize;
    let mut times = Vec::with_capacity(count + 1);
    let mut tau = Vec::with_capacity(count + 1);
    let mut positions = Vec::with_capacity(count + 1);
    let mut k = 0;
    for i in 0..=count {
        let s = i as f64 * out_dt;
        while k + 2 < a.values.len() && a.values[k + 1] <= s {
            k += 1;
        }
        let (a0, a1) = (a.values[k], a.values[k + 1]);
        let frac = if a1 > a0 { ((s - a0) / (a1 - a0)).clamp(0.0, 1.0) } else { 0.0 };
        let t = path.times[k] + frac * (path.times[k + 1] - path.times[k]);
        let amb: Vec<f64> = path.ambient[k]
            .iter()
            .zip(&path.ambient[k + 1])
            .map(|(p, q)| p + frac * (q - p))
            .collect();
        times.push(s);
        tau.push(t);
        positions.push(from_ambient(&path.kind, &amb));
    }
    Ok(LbmPath {
        times,
        tau,
        positions,
        truncated,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RevuzReport {
    pub t: f64,
    pub gamma: f64,
    pub paths: usize,
    pub lhs: Estimate,
    pub rhs: f64,
    pub rhs_heat_cutoff: usize,
    pub rhs_grid_points: usize,
    pub overlap_95: bool,
}

/// Setup shared by the Revuz check and the LBM experiment.
#[derive(Clone, Debug)]
pub struct RevuzSetup {
    pub x0: Point,
    pub t: f64,
    pub dt: f64,
    pub gamma: f64,
    pub heat_cutoff: usize,
}

/// Field sample used for the whole path ensemble.
pub fn revuz_field(modes: &std::sync::Arc<ModeSet>, seed: u64) -> FieldSample {
    sample_field_at(modes, derive_seed(seed, purpose::FIELD), 0)
}

/// `E_x[∫₀ᵗ u(B_s) dA_s]` by Monte Carlo over paths against
/// `∫₀ᵗ∫ u(y) p_s(x,y) dμ^h(y) ds` from the spectral heat kernel.
pub fn revuz_check<U>(
    setup: &RevuzSetup,
    sample: &FieldSample,
    u: U,
    grid: &QuadratureGrid,
    n_paths: usize,
    seed: u64,
) -> Result<RevuzReport>
where
    U: Fn(&Point) -> f64 + Sync,
{
    let model = sample.modes().model().clone();
    if !matches!(model.kind(), ManifoldKind::FlatTorus { .. } | ManifoldKind::Sphere { .. }) {
        return Err(LqgError::Unsupported("Revuz check on products".into()));
    }
    let lhs: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = RngStream::for_purpose(seed, purpose::PATHS, i);
            let path = simulate_bm(&model, &setup.x0, setup.t, setup.dt, &mut rng)?;
            let f: Vec<f64> = path
                .points()
                .iter()
                .map(|x| u(x) * liouville_density(sample, setup.gamma, x))
                .collect();
            Ok(*trapezoid_cumulative(&path.times, &f).last().unwrap())
        })
        .collect::<Result<_>>()?;
    let lhs = Estimate::from_samples(&lhs);

    let spec = model.laplace_spectrum(setup.heat_cutoff)?;
    let g: Vec<f64> = spec
        .entries()
        .iter()
        .map(|e| {
            if e.eigenvalue == 0.0 {
                setup.t
            } else {
                -(-e.eigenvalue * setup.t).exp_m1() / e.eigenvalue
            }
        })
        .collect();
    let terms: Vec<f64> = grid
        .points()
        .par_iter()
        .zip(grid.weights())
        .map(|(y, w)| {
            let z = spec.zonal_sums(&setup.x0, y);
            let p: f64 = z.iter().zip(&g).map(|(a, b)| a * b).sum();
            w * u(y) * liouville_density(sample, setup.gamma, y) * p
        })
        .collect();
    let rhs = crate::stats::pairwise_sum(&terms);
    Ok(RevuzReport {
        t: setup.t,
        gamma: setup.gamma,
        paths: n_paths,
        overlap_95: lhs.contains(rhs, 0.95),
        lhs,
        rhs,
        rhs_heat_cutoff: setup.heat_cutoff,
        rhs_grid_points: grid.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::ManifoldModel;
    use crate::spectral::GjmsSpectrum;

    fn torus_sample() -> FieldSample {
        let model = ManifoldModel::torus(vec![2.0 * std::f64::consts::PI; 2]).unwrap();
        let modes = GjmsSpectrum::of(&model, 3).unwrap().mode_set(24).unwrap();
        revuz_field(&modes, 5)
    }

    #[test]
    fn gamma_zero_gives_clock() {
        let s = torus_sample();
        let model = s.modes().model().clone();
        let path = simulate_bm(&model, &model.base_point(), 1.0, 0.01, &mut RngStream::new(1, 0)).unwrap();
        let a = additive_functional(&path, &s, 0.0);
        for (t, v) in a.times.iter().zip(&a.values) {
            assert!((t - v).abs() < 1e-12);
        }
        let x = time_change(&path, &a, 0.5, 0.01).unwrap();
        assert!(!x.truncated);
        for (s, t) in x.times.iter().zip(&x.tau) {
            assert!((s - t).abs() < 1e-9);
        }
    }

    #[test]
    fn inverse_identity_and_truncation() {
        let s = torus_sample();
        let model = s.modes().model().clone();
        let path = simulate_bm(&model, &model.base_point(), 1.0, 0.01, &mut RngStream::new(2, 0)).unwrap();
        let a = additive_functional(&path, &s, 1.0);
        assert!(a.values.windows(2).all(|w| w[1] > w[0]));
        let total = *a.values.last().unwrap();
        let x = time_change(&path, &a, total + 1.0, total / 50.0).unwrap();
        assert!(x.truncated);
        assert!((x.tau.last().unwrap() - 1.0).abs() < 1e-6);
        assert!(x.tau.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[cfg(test)]
mod revuz_tests {
    use super::*;
    use crate::manifolds::ManifoldModel;
    use crate::spectral::GjmsSpectrum;

    #[test]
    fn revuz_sides_agree() {
        let model = ManifoldModel::torus(vec![2.0 * std::f64::consts::PI; 2]).unwrap();
        let modes = GjmsSpectrum::of(&model, 3).unwrap().mode_set(24).unwrap();
        let s = revuz_field(&modes, 5);
        let grid = model.quadrature_for_band(31).unwrap();
        let setup = RevuzSetup { x0: model.base_point(), t: 1.0, dt: 0.01, gamma: 1.0, heat_cutoff: 20 };
        for u in [|_: &Point| 1.0, |x: &Point| 1.0 + 0.5 * x.coords[0].cos()] {
            let r = revuz_check(&setup, &s, u, &grid, 2000, 7).unwrap();
            assert!(r.overlap_95, "{r:?}");
        }
    }
}
