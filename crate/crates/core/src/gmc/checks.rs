use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measure::{Flavor, LqgBuilder, Scheme};
use crate::cgf::{derive_seed, purpose, sample_field_at, RngStream};
use crate::error::{LqgError, Result};
use crate::manifolds::{ManifoldKind, Point, QuadratureGrid};
use crate::spectral::ModeSet;
use crate::stats::{linear_fit, ols_robust, quantile, Estimate, LinearFit};

/// Total masses of `n` independent samples (stream `i` for sample `i`).
pub fn total_masses(builder: &LqgBuilder, n: usize, seed: u64) -> Vec<f64> {
    let modes = builder.basis().modes().clone();
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let s = sample_field_at(&modes, seed, i);
            crate::stats::pairwise_sum(&builder.weights(s.coefficients()))
        })
        .collect()
}

/// Masses of several grid subsets per sample, `out[k][i]` for subset `k`.
pub fn subset_masses(builder: &LqgBuilder, subsets: &[Vec<usize>], n: usize, seed: u64) -> Vec<Vec<f64>> {
    let modes = builder.basis().modes().clone();
    let per_sample: Vec<Vec<f64>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let s = sample_field_at(&modes, seed, i);
            let w = builder.weights(s.coefficients());
            subsets.iter().map(|b| b.iter().map(|j| w[*j]).sum()).collect()
        })
        .collect();
    (0..subsets.len())
        .map(|k| per_sample.iter().map(|v| v[k]).collect())
        .collect()
}

/// `E[X^p]` estimates for each `p`; negative powers use the cap `X ≥ floor`.
pub fn mass_moments(masses: &[f64], ps: &[f64], floor: f64) -> Vec<(f64, Estimate)> {
    ps.iter()
        .map(|&p| {
            let v: Vec<f64> = masses
                .iter()
                .map(|m| if p < 0.0 { m.max(floor).powf(p) } else { m.powf(p) })
                .collect();
            (p, Estimate::from_samples(&v))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub gamma: f64,
    pub ell: usize,
    pub scheme: Scheme,
    pub mass_mean: f64,
    pub mass_var: f64,
    pub moments: std::collections::BTreeMap<String, f64>,
}

pub fn ensemble_summary(builder: &LqgBuilder, masses: &[f64], ps: &[f64]) -> EnsembleSummary {
    let moments = mass_moments(masses, ps, 1e-12)
        .into_iter()
        .map(|(p, e)| (format!("{p}"), e.value))
        .collect();
    EnsembleSummary {
        gamma: builder.gamma(),
        ell: builder.basis().modes().ell(),
        scheme: builder.scheme(),
        mass_mean: crate::stats::mean(masses),
        mass_var: crate::stats::variance(masses),
        moments,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampbellReport {
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub z: f64,
}

/// `E ∫ f(⟨h,u⟩, x) dμ^h(x)` against `E ∫ f(⟨h + γ k_ℓ(x,·), u⟩, x) dvol(x)`,
/// plain flavor, eigenfunction scheme. `f` receives the pairing and the grid index.
pub fn campbell_check<F>(builder: &LqgBuilder, u: &[f64], f: F, n: usize, seed: u64) -> Result<CampbellReport>
where
    F: Fn(f64, usize) -> f64 + Sync,
{
    if builder.flavor() != Flavor::Plain || builder.scheme() != Scheme::Eigenfunction {
        return Err(LqgError::Unsupported("Campbell check uses the plain eigenfunction measure".into()));
    }
    let basis = builder.basis();
    let modes = basis.modes().clone();
    let gamma = builder.gamma();
    let scales = modes.field_scales();
    // ⟨k_ℓ(x_i, ·), u⟩ per grid point
    let ku: Vec<f64> = (0..basis.n_points())
        .map(|i| {
            basis
                .row(i)
                .iter()
                .zip(&scales)
                .zip(u)
                .map(|((v, s), a)| v * s * s * a)
                .sum()
        })
        .collect();
    let w = basis.grid().weights().to_vec();
    let lhs: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let s = sample_field_at(&modes, seed, i);
            let mu = builder.weights(s.coefficients());
            let p = s.pair(u);
            mu.iter().enumerate().map(|(k, m)| m * f(p, k)).sum()
        })
        .collect();
    let rhs: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let s = sample_field_at(&modes, derive_seed(seed, purpose::AUX), i);
            let p = s.pair(u);
            w.iter().enumerate().map(|(k, wk)| wk * f(p + gamma * ku[k], k)).sum()
        })
        .collect();
    let (a, b) = (Estimate::from_samples(&lhs), Estimate::from_samples(&rhs));
    Ok(CampbellReport {
        lhs: a,
        rhs: b,
        z: a.z_difference(&b),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleReport {
    pub ell_1: usize,
    pub ell_2: usize,
    pub outer: usize,
    pub inner: usize,
    pub fit: LinearFit,
    pub slope_ci_contains_one: bool,
    pub intercept_ci_contains_zero: bool,
    pub mean_coarse: Estimate,
    pub mean_fine: Estimate,
    pub subset_volume: f64,
}

/// Nested Monte Carlo for `E[μ_{ℓ₂}(B) | ξ_1..ξ_{ℓ₁}] = μ_{ℓ₁}(B)`: regress the
/// inner average of `μ_{ℓ₂}(B)` on `μ_{ℓ₁}(B)` over the outer draws.
#[allow(clippy::too_many_arguments)]
pub fn martingale_check(
    modes: &Arc<ModeSet>,
    grid: Arc<QuadratureGrid>,
    gamma: f64,
    subset: &[usize],
    ell_1: usize,
    outer: usize,
    inner: usize,
    seed: u64,
) -> Result<MartingaleReport> {
    let ell_2 = modes.ell();
    if ell_1 > ell_2 || ell_1 == 0 {
        return Err(LqgError::InvalidParameter(format!(
            "need 0 < ℓ₁ ≤ ℓ₂ (got ℓ₁ = {ell_1}, ℓ₂ = {ell_2})"
        )));
    }
    let coarse = LqgBuilder::new(&modes.truncate(ell_1), grid.clone(), gamma, Flavor::Plain, Scheme::Eigenfunction)?;
    let fine = LqgBuilder::new(modes, grid.clone(), gamma, Flavor::Plain, Scheme::Eigenfunction)?;
    let scales = modes.field_scales();
    let rows: Vec<(f64, f64)> = (0..outer as u64)
        .into_par_iter()
        .map(|i| {
            let xi = RngStream::new(seed, i).normals(ell_1);
            let mut c = vec![0.0; modes.len()];
            for j in 1..=ell_1 {
                c[j] = xi[j - 1] * scales[j];
            }
            let x = subset_mass(&coarse.weights(&c[..=ell_1]), subset);
            let mut buf = vec![0.0; fine.n_points()];
            let mut acc = 0.0;
            for k in 0..inner as u64 {
                let mut r = RngStream::for_purpose(seed, purpose::INNER, i * inner as u64 + k);
                for j in ell_1 + 1..=ell_2 {
                    c[j] = r.normal() * scales[j];
                }
                fine.weights_into(&c, &mut buf);
                acc += subset_mass(&buf, subset);
            }
            (x, acc / inner as f64)
        })
        .collect();
    let x: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let fit = ols_robust(&x, &y);
    Ok(MartingaleReport {
        ell_1,
        ell_2,
        outer,
        inner,
        fit,
        slope_ci_contains_one: fit.slope.contains(1.0, 0.95),
        intercept_ci_contains_zero: fit.intercept.contains(0.0, 0.95),
        mean_coarse: Estimate::from_samples(&x),
        mean_fine: Estimate::from_samples(&y),
        subset_volume: subset.iter().map(|i| grid.weights()[*i]).sum(),
    })
}

fn subset_mass(w: &[f64], subset: &[usize]) -> f64 {
    subset.iter().map(|i| w[*i]).sum()
}

/// Grid indices within distance `r` of `center`.
pub fn ball_indices(grid: &QuadratureGrid, model: &crate::manifolds::ManifoldModel, center: &Point, r: f64) -> Vec<usize> {
    grid.points()
        .iter()
        .enumerate()
        .filter(|(_, p)| model.distance(center, p) <= r)
        .map(|(i, _)| i)
        .collect()
}

/// Typical spacing of grid nodes.
pub fn grid_spacing(grid: &QuadratureGrid, model: &crate::manifolds::ManifoldModel) -> f64 {
    let res = grid.resolution() as f64;
    match model.kind() {
        ManifoldKind::Sphere { radius, .. } => std::f64::consts::PI * radius / (res + 1.0),
        ManifoldKind::FlatTorus { sides, .. } => sides.iter().cloned().fold(0.0, f64::max) / res,
        ManifoldKind::ProductSurfaces {
            curvature_1,
            curvature_2,
        } => std::f64::consts::PI / curvature_1.min(*curvature_2).sqrt() / (res + 1.0),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallScaling {
    pub radii: Vec<f64>,
    pub grid_volume: Vec<f64>,
    pub mean_mass: Vec<Estimate>,
    pub quantile_levels: Vec<f64>,
    /// `quantiles[q][r]`.
    pub quantiles: Vec<Vec<f64>>,
    pub mean_slope: f64,
    pub quantile_slopes: Vec<f64>,
    /// Fraction of samples whose ball masses increase with `r`.
    pub monotone_fraction: f64,
}

/// Log–log slopes of `μ(B_r(center))` over a radius ladder.
pub fn ball_scaling_stats(
    builder: &LqgBuilder,
    center: &Point,
    radii: &[f64],
    quantile_levels: &[f64],
    n: usize,
    seed: u64,
) -> Result<BallScaling> {
    let basis = builder.basis();
    let model = basis.modes().model().clone();
    let grid = basis.grid();
    let h = grid_spacing(grid, &model);
    if let Some(r) = radii.iter().find(|r| **r < 2.0 * h) {
        return Err(LqgError::InvalidParameter(format!(
            "radius {r} is below the grid resolution (spacing {h:.4})"
        )));
    }
    let balls: Vec<Vec<usize>> = radii.iter().map(|r| ball_indices(grid, &model, center, *r)).collect();
    let masses = subset_masses(builder, &balls, n, seed);
    let monotone = (0..n)
        .filter(|i| masses.windows(2).all(|w| w[0][*i] <= w[1][*i]))
        .count() as f64
        / n as f64;
    let log_r: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let mean_mass: Vec<Estimate> = masses.iter().map(|m| Estimate::from_samples(m)).collect();
    let mean_slope = linear_fit(&log_r, &mean_mass.iter().map(|e| e.value.ln()).collect::<Vec<_>>()).0;
    let quantiles: Vec<Vec<f64>> = quantile_levels
        .iter()
        .map(|q| masses.iter().map(|m| quantile(m, *q)).collect())
        .collect();
    let quantile_slopes = quantiles
        .iter()
        .map(|qs| linear_fit(&log_r, &qs.iter().map(|v| v.ln()).collect::<Vec<_>>()).0)
        .collect();
    Ok(BallScaling {
        radii: radii.to_vec(),
        grid_volume: balls.iter().map(|b| b.iter().map(|i| grid.weights()[*i]).sum()).collect(),
        mean_mass,
        quantile_levels: quantile_levels.to_vec(),
        quantiles,
        mean_slope,
        quantile_slopes,
        monotone_fraction: monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::ManifoldModel;
    use crate::spectral::GjmsSpectrum;

    fn setup(ell: usize, res: usize) -> (Arc<ModeSet>, Arc<QuadratureGrid>) {
        let model = ManifoldModel::unit_sphere(2).unwrap();
        let m = GjmsSpectrum::of(&model, 8).unwrap().mode_set(ell).unwrap();
        (m, Arc::new(model.quadrature(res).unwrap()))
    }

    #[test]
    fn mean_mass_is_volume() {
        let (m, grid) = setup(24, 10);
        let b = LqgBuilder::new(&m, grid, 1.0, Flavor::Plain, Scheme::Eigenfunction).unwrap();
        let masses = total_masses(&b, 4000, 3);
        let e = Estimate::from_samples(&masses);
        assert!(e.within_sigma(4.0 * std::f64::consts::PI, 4.0), "{e:?}");
    }

    #[test]
    fn martingale_with_equal_levels_is_exact() {
        let (m, grid) = setup(10, 8);
        let subset: Vec<usize> = (0..40).collect();
        let r = martingale_check(&m, grid, 1.0, &subset, 10, 30, 3, 1).unwrap();
        assert!((r.fit.slope.value - 1.0).abs() < 1e-12);
        assert!(r.fit.intercept.value.abs() < 1e-12);
    }

    #[test]
    fn campbell_constant_function() {
        let (m, grid) = setup(15, 8);
        let b = LqgBuilder::new(&m, grid, 0.8, Flavor::Plain, Scheme::Eigenfunction).unwrap();
        let u = vec![0.0; m.len()];
        let r = campbell_check(&b, &u, |_, _| 1.0, 2000, 5).unwrap();
        assert!((r.rhs.value - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!(r.z.abs() < 4.0);
    }

    #[test]
    fn small_radii_rejected() {
        let (m, grid) = setup(8, 8);
        let b = LqgBuilder::new(&m, grid, 1.0, Flavor::Plain, Scheme::Eigenfunction).unwrap();
        let x = m.model().base_point();
        assert!(ball_scaling_stats(&b, &x, &[0.01, 0.5], &[0.5], 10, 1).is_err());
    }
}
