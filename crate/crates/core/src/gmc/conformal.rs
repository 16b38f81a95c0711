//! Conformal quasi-invariance of the LQG measure: the `g`-measure times
//! `e^{-γξ + (γ²/2)φ̄ + nφ}` against a measure built directly under `g'`.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measure::{Flavor, LqgBuilder, Scheme};
use crate::cgf::{purpose, sample_field_at, FieldSample, RngStream};
use crate::error::{LqgError, Result};
use crate::spectral::ConformalChange;
use crate::stats::Estimate;

/// `e^{-γξ + (γ²/2) φ̄ + nφ}` on the grid.
pub fn conformal_factor(change: &ConformalChange, gamma: f64, xi: f64) -> Vec<f64> {
    let n = change.basis().modes().model().dimension() as f64;
    change
        .phi()
        .iter()
        .zip(change.phi_bar())
        .map(|(p, pb)| (-gamma * xi + 0.5 * gamma * gamma * pb + n * p).exp())
        .collect()
}

/// Adjusted-flavor factor `e^{-γξ + (n + γ²/2) φ}`.
pub fn adjusted_conformal_factor(change: &ConformalChange, gamma: f64, xi: f64) -> Vec<f64> {
    let n = change.basis().modes().model().dimension() as f64;
    change
        .phi()
        .iter()
        .map(|p| (-gamma * xi + (n + 0.5 * gamma * gamma) * p).exp())
        .collect()
}

/// `max_i` relative gap between `e^{(γ²/2)(r' - r)}·F_plain` with
/// `r' = r - φ̄ + φ` and the adjusted factor.
pub fn adjusted_factor_discrepancy(change: &ConformalChange, gamma: f64, r_g: &[f64], xi: f64) -> f64 {
    let plain = conformal_factor(change, gamma, xi);
    let adjusted = adjusted_conformal_factor(change, gamma, xi);
    let g2 = 0.5 * gamma * gamma;
    (0..plain.len())
        .map(|i| {
            let r_prime = r_g[i] - change.phi_bar()[i] + change.phi()[i];
            let combined = (g2 * (r_prime - r_g[i])).exp() * plain[i];
            (combined / adjusted[i] - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Transformed weights `F · μ^h_g` and the factor `F`.
pub fn conformal_measure_transform(builder: &LqgBuilder, change: &ConformalChange, sample: &FieldSample) -> (Vec<f64>, Vec<f64>) {
    let xi = change.xi(sample.coefficients());
    let factor = conformal_factor(change, builder.gamma(), xi);
    let mu = builder.weights(sample.coefficients());
    (mu.iter().zip(&factor).map(|(a, b)| a * b).collect(), factor)
}

/// Gaussian vector on the grid with covariance `k_{g'}` (transformed kernel),
/// sampled through an eigendecomposition.
#[derive(Clone, Debug)]
pub struct DirectSampler {
    /// `n_points × rank`, row-major.
    factor: Vec<f64>,
    rank: usize,
    half_var: Vec<f64>,
    base: Vec<f64>,
    gamma: f64,
}

impl DirectSampler {
    pub fn new(change: &ConformalChange, gamma: f64) -> Result<Self> {
        let np = change.basis().n_points();
        let cov = DMatrix::from_row_slice(np, np, &change.covariance_matrix_prime());
        let eig = SymmetricEigen::new(cov);
        let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        if !(max > 0.0) {
            return Err(LqgError::Numerical("transformed covariance is zero".into()));
        }
        let keep: Vec<usize> = (0..np).filter(|k| eig.eigenvalues[*k] > 1e-12 * max).collect();
        let rank = keep.len();
        let mut factor = vec![0.0; np * rank];
        for i in 0..np {
            for (c, &k) in keep.iter().enumerate() {
                factor[i * rank + c] = eig.eigenvectors[(i, k)] * eig.eigenvalues[k].sqrt();
            }
        }
        let half_var = (0..np)
            .map(|i| {
                let row = &factor[i * rank..(i + 1) * rank];
                0.5 * gamma * gamma * row.iter().map(|v| v * v).sum::<f64>()
            })
            .collect();
        let w = change.basis().grid().weights();
        let base = w.iter().zip(change.density()).map(|(a, b)| a * b).collect();
        Ok(Self {
            factor,
            rank,
            half_var,
            base,
            gamma,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Weights `e^{nφ} w_i e^{γ h'_i - (γ²/2) Var h'_i}` of one direct draw.
    pub fn weights(&self, rng: &mut RngStream) -> Vec<f64> {
        let z = rng.normals(self.rank);
        (0..self.base.len())
            .map(|i| {
                let row = &self.factor[i * self.rank..(i + 1) * self.rank];
                let h: f64 = row.iter().zip(&z).map(|(a, b)| a * b).sum();
                self.base[i] * (self.gamma * h - self.half_var[i]).exp()
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetComparison {
    pub first_transformed: Estimate,
    pub first_direct: Estimate,
    pub second_transformed: Estimate,
    pub second_direct: Estimate,
    pub z_first: f64,
    pub z_second: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformalMeasureReport {
    pub subsets: Vec<SubsetComparison>,
    pub total_transformed: Estimate,
    pub volume_prime: f64,
    /// Every moment pair within 3σ.
    pub pass: bool,
}

/// Moments of subset masses: transformed `g`-ensemble (stream `i` of `seed`)
/// against the direct `g'`-ensemble (independent sub-seed).
pub fn conformal_measure_check(
    builder: &LqgBuilder,
    change: &ConformalChange,
    subsets: &[Vec<usize>],
    n: usize,
    seed: u64,
) -> Result<ConformalMeasureReport> {
    if builder.flavor() != Flavor::Plain || builder.scheme() != Scheme::Eigenfunction {
        return Err(LqgError::Unsupported("conformal check uses the plain eigenfunction measure".into()));
    }
    let direct = DirectSampler::new(change, builder.gamma())?;
    let modes = builder.basis().modes().clone();
    let mass = |w: &[f64]| -> Vec<f64> {
        let mut v: Vec<f64> = subsets.iter().map(|b| b.iter().map(|i| w[*i]).sum()).collect();
        v.push(crate::stats::pairwise_sum(w));
        v
    };
    let transformed: Vec<Vec<f64>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let s = sample_field_at(&modes, seed, i);
            mass(&conformal_measure_transform(builder, change, &s).0)
        })
        .collect();
    let direct_masses: Vec<Vec<f64>> = (0..n as u64)
        .into_par_iter()
        .map(|i| mass(&direct.weights(&mut RngStream::for_purpose(seed, purpose::DIRECT, i))))
        .collect();
    let column = |rows: &[Vec<f64>], k: usize, p: i32| -> Vec<f64> { rows.iter().map(|r| r[k].powi(p)).collect() };
    let mut out = Vec::with_capacity(subsets.len());
    let mut pass = true;
    for k in 0..subsets.len() {
        let ft = Estimate::from_samples(&column(&transformed, k, 1));
        let fd = Estimate::from_samples(&column(&direct_masses, k, 1));
        let st = Estimate::from_samples(&column(&transformed, k, 2));
        let sd = Estimate::from_samples(&column(&direct_masses, k, 2));
        let (z1, z2) = (ft.z_difference(&fd), st.z_difference(&sd));
        pass &= z1.abs() <= 3.0 && z2.abs() <= 3.0;
        out.push(SubsetComparison {
            first_transformed: ft,
            first_direct: fd,
            second_transformed: st,
            second_direct: sd,
            z_first: z1,
            z_second: z2,
        });
    }
    Ok(ConformalMeasureReport {
        subsets: out,
        total_transformed: Estimate::from_samples(&column(&transformed, subsets.len(), 1)),
        volume_prime: change.volume_prime(),
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::ManifoldModel;
    use crate::spectral::GjmsSpectrum;
    use std::sync::Arc;

    #[test]
    fn zero_phi_factor_is_one() {
        let model = ManifoldModel::unit_sphere(2).unwrap();
        let m = GjmsSpectrum::of(&model, 5).unwrap().mode_set(15).unwrap();
        let basis = Arc::new(m.basis(Arc::new(model.quadrature(8).unwrap())));
        let change = ConformalChange::new(basis.clone(), &[0.0]).unwrap();
        let s = sample_field_at(&m, 1, 1);
        let xi = change.xi(s.coefficients());
        assert!(xi.abs() < 1e-14);
        assert!(conformal_factor(&change, 1.0, xi).iter().all(|f| (f - 1.0).abs() < 1e-13));
    }

    #[test]
    fn adjusted_factor_recombines() {
        let model = ManifoldModel::unit_sphere(2).unwrap();
        let m = GjmsSpectrum::of(&model, 5).unwrap().mode_set(15).unwrap();
        let basis = Arc::new(m.basis(Arc::new(model.quadrature(10).unwrap())));
        let change = ConformalChange::new(basis.clone(), &[0.1, 0.2, -0.1, 0.05]).unwrap();
        let r = vec![0.19; basis.n_points()];
        assert!(adjusted_factor_discrepancy(&change, 1.3, &r, 0.4) < 1e-13);
    }
}
