//! Galerkin projection of the random co-polyharmonic operator onto the
//! truncated eigenbasis: `D u = θ G u` with `D = diag(ν)` and
//! `G_ab = ∫ψ_a ψ_b dμ^h`.

use std::io::Write;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LqgError, Result};
use crate::spectral::{ConformalChange, GridBasis};

#[derive(Clone, Debug)]
pub struct RandomGjmsOperator {
    nu: Vec<f64>,
    gram: DMatrix<f64>,
    chol: Cholesky<f64, nalgebra::Dyn>,
    epsilon: f64,
    theta: Vec<f64>,
    /// Columns are `G`-orthonormal eigenvectors.
    vectors: DMatrix<f64>,
    volume: f64,
}

/// Gram matrix of the basis against per-point measure weights (quadrature
/// weight times density), including the constant mode.
pub fn measure_gram(basis: &GridBasis, weights: &[f64]) -> DMatrix<f64> {
    let m = basis.n_modes();
    let np = basis.n_points();
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|a| {
            let mut r = vec![0.0; m];
            for i in 0..np {
                let row = basis.row(i);
                let wa = weights[i] * row[a];
                for b in a..m {
                    r[b] += wa * row[b];
                }
            }
            r
        })
        .collect();
    DMatrix::from_fn(m, m, |a, b| if b >= a { rows[a][b] } else { rows[b][a] })
}

pub fn random_gjms_assemble(basis: &GridBasis, weights: &[f64]) -> Result<RandomGjmsOperator> {
    if weights.len() != basis.n_points() {
        return Err(LqgError::InvalidParameter("weights do not match the grid".into()));
    }
    let modes = basis.modes();
    if modes.band() * 2 > basis.grid().band() {
        return Err(LqgError::InvalidParameter(format!(
            "grid band {} below twice the mode band {}",
            basis.grid().band(),
            modes.band()
        )));
    }
    RandomGjmsOperator::from_gram(modes.nu().to_vec(), measure_gram(basis, weights), modes.model().volume())
}

impl RandomGjmsOperator {
    pub fn from_gram(nu: Vec<f64>, gram: DMatrix<f64>, volume: f64) -> Result<Self> {
        let m = nu.len();
        let scale = gram.trace() / m as f64;
        let mut epsilon = 0.0;
        let chol = loop {
            let g = &gram + DMatrix::identity(m, m) * epsilon;
            if let Some(c) = Cholesky::new(g) {
                break c;
            }
            epsilon = if epsilon == 0.0 { 1e-14 * scale } else { 10.0 * epsilon };
            if epsilon > 1e-4 * scale {
                return Err(LqgError::Numerical("gram matrix not positive definite".into()));
            }
        };
        let linv = chol
            .l()
            .solve_lower_triangular(&DMatrix::identity(m, m))
            .ok_or_else(|| LqgError::Numerical("singular Cholesky factor".into()))?;
        let d = DMatrix::from_diagonal(&DVector::from_vec(nu.clone()));
        let c = &linv * d * linv.transpose();
        let c = (&c + c.transpose()) * 0.5;
        let eig = SymmetricEigen::new(c);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let theta: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let y = DMatrix::from_fn(m, m, |r, col| eig.eigenvectors[(r, order[col])]);
        let vectors = linv.transpose() * y;
        Ok(Self {
            nu,
            gram,
            chol,
            epsilon,
            theta,
            vectors,
            volume,
        })
    }

    pub fn len(&self) -> usize {
        self.nu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nu.is_empty()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Regularization added to `G`, zero when it was not needed.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// All generalized eigenvalues, ascending; the first is the constant mode.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Spectrum on grounded functions (the zero eigenvalue removed).
    pub fn grounded_spectrum(&self) -> &[f64] {
        &self.theta[1..]
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// Smallest eigenvalue relative to the largest (≥ 0 up to rounding).
    pub fn min_relative_eigenvalue(&self) -> f64 {
        self.theta[0] / self.theta.last().copied().unwrap_or(1.0).abs().max(f64::MIN_POSITIVE)
    }

    /// `e^{−tP^h} u₀` in coefficients.
    pub fn heat_flow(&self, u0: &[f64], t: f64) -> Vec<f64> {
        let u = DVector::from_column_slice(u0);
        let a = self.vectors.transpose() * (&self.gram * u);
        let decayed = DVector::from_iterator(a.len(), a.iter().zip(&self.theta).map(|(c, th)| c * (-th * t).exp()));
        (&self.vectors * decayed).as_slice().to_vec()
    }

    /// `½𝔭(u,u) = ½ Σ ν u²`.
    pub fn energy(&self, u: &[f64]) -> f64 {
        0.5 * u.iter().zip(&self.nu).map(|(a, v)| v * a * a).sum::<f64>()
    }

    /// `‖P^h u‖²_{L²(μ)} = (Du)ᵀ G⁻¹ (Du)`.
    pub fn dissipation(&self, u: &[f64]) -> f64 {
        let du = DVector::from_iterator(u.len(), u.iter().zip(&self.nu).map(|(a, v)| a * v));
        let x = self.chol.solve(&du);
        du.dot(&x)
    }

    /// `⟨u, 1⟩_{L²(μ)}`.
    pub fn mass(&self, u: &[f64]) -> f64 {
        let v = self.volume.sqrt();
        (0..u.len()).map(|b| self.gram[(0, b)] * u[b]).sum::<f64>() * v
    }

    pub fn write_spectrum_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["index", "theta"])?;
        for (i, t) in self.theta.iter().enumerate() {
            out.write_record([i.to_string(), format!("{t:.17e}")])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn copoly_heat_flow(op: &RandomGjmsOperator, u0: &[f64], t: f64) -> Vec<f64> {
    op.heat_flow(u0, t)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DissipationRow {
    pub t: f64,
    pub energy: f64,
    pub fd_derivative: f64,
    pub dissipation: f64,
    pub rel_error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DissipationReport {
    pub rows: Vec<DissipationRow>,
    pub max_rel_error: f64,
    pub energy_nonincreasing: bool,
    pub mass_drift: f64,
}

/// Central differences of `½𝔭(u_t)` against `−‖P^h u_t‖²` on a `t`-grid.
pub fn energy_dissipation_check(op: &RandomGjmsOperator, u0: &[f64], times: &[f64]) -> DissipationReport {
    let theta_max = op.theta.last().copied().unwrap_or(1.0).max(1.0);
    let h = 1e-3 / theta_max;
    let mass0 = op.mass(u0);
    let mut rows = Vec::with_capacity(times.len());
    let mut max_rel: f64 = 0.0;
    let mut drift: f64 = 0.0;
    for &t in times {
        let ut = op.heat_flow(u0, t);
        let ep = op.energy(&op.heat_flow(u0, t + h));
        // the Galerkin flow is defined for t < 0 too, so t = 0 stays central
        let em = op.energy(&op.heat_flow(u0, t - h));
        let fd = (ep - em) / (2.0 * h);
        let dis = op.dissipation(&ut);
        let rel = (fd + dis).abs() / dis.abs().max(f64::MIN_POSITIVE);
        max_rel = max_rel.max(rel);
        drift = drift.max((op.mass(&ut) - mass0).abs() / mass0.abs().max(1.0));
        rows.push(DissipationRow {
            t,
            energy: op.energy(&ut),
            fd_derivative: fd,
            dissipation: dis,
            rel_error: rel,
        });
    }
    let energy_nonincreasing = rows.windows(2).all(|w| w[1].energy <= w[0].energy * (1.0 + 1e-12));
    DissipationReport {
        rows,
        max_rel_error: max_rel,
        energy_nonincreasing,
        mass_drift: drift,
    }
}

/// `𝔭(u,v)` assembled on the grid from the metric `g' = e^{2φ}g`
/// (`P' = e^{−nφ}P`, `dvol' = e^{nφ}dvol`), next to the spectral `Σ ν u v`.
pub fn form_conformal_check(change: &ConformalChange, u: &[f64], v: &[f64]) -> (f64, f64) {
    let basis = change.basis();
    let modes = basis.modes();
    let n = modes.model().dimension() as f64;
    let pv: Vec<f64> = v.iter().zip(modes.nu()).map(|(a, b)| a * b).collect();
    let u_grid = basis.synthesize(u);
    let pv_grid = basis.synthesize(&pv);
    let w = basis.grid().weights();
    let phi = change.phi();
    let terms: Vec<f64> = (0..basis.n_points())
        .map(|i| {
            let dvol = w[i] * (n * phi[i]).exp();
            let p_prime = (-n * phi[i]).exp() * pv_grid[i];
            dvol * u_grid[i] * p_prime
        })
        .collect();
    let lhs = crate::stats::pairwise_sum(&terms);
    let rhs: f64 = u.iter().zip(&pv).map(|(a, b)| a * b).sum();
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgf::sample_field_at;
    use crate::gmc::{Flavor, LqgBuilder, Scheme};
    use crate::manifolds::ManifoldModel;
    use crate::spectral::GjmsSpectrum;
    use std::sync::Arc;

    fn setup() -> Arc<GridBasis> {
        let model = ManifoldModel::unit_sphere(2).unwrap();
        let modes = GjmsSpectrum::of(&model, 8).unwrap().mode_set(35).unwrap();
        let grid = Arc::new(model.quadrature(16).unwrap());
        Arc::new(modes.basis(grid))
    }

    #[test]
    fn gamma_zero_recovers_nu() {
        let basis = setup();
        let op = random_gjms_assemble(&basis, basis.grid().weights()).unwrap();
        let mut nu = basis.modes().nu().to_vec();
        nu.sort_by(f64::total_cmp);
        for (a, b) in op.theta().iter().zip(&nu) {
            assert!((a - b).abs() < 1e-9 * b.max(1.0), "{a} {b}");
        }
        assert_eq!(op.epsilon(), 0.0);
    }

    #[test]
    fn random_spectrum_and_dissipation() {
        let basis = setup();
        let b = LqgBuilder::from_basis(basis.clone(), 1.0, Flavor::Plain, Scheme::Eigenfunction).unwrap();
        let s = sample_field_at(basis.modes(), 3, 0);
        let op = random_gjms_assemble(&basis, &b.build(&s).weights).unwrap();
        assert!(op.theta()[0].abs() < 1e-8);
        assert!(op.grounded_spectrum().iter().all(|t| *t > 0.0));
        let u0: Vec<f64> = (0..op.len()).map(|j| 1.0 / (1.0 + j as f64)).collect();
        let rep = energy_dissipation_check(&op, &u0, &[0.01, 0.1, 0.5]);
        assert!(rep.max_rel_error < 1e-4, "{rep:?}");
        assert!(rep.energy_nonincreasing);
        assert!(rep.mass_drift < 1e-10);
        let u = op.heat_flow(&u0, 0.0);
        for (a, b) in u.iter().zip(&u0) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn form_invariance() {
        let basis = setup();
        let mut phi = vec![0.0; basis.n_modes()];
        phi[2] = 0.3;
        phi[5] = -0.2;
        let change = ConformalChange::new(basis.clone(), &phi).unwrap();
        let u: Vec<f64> = (0..basis.n_modes()).map(|j| (j as f64).sin()).collect();
        let v: Vec<f64> = (0..basis.n_modes()).map(|j| (j as f64 * 0.7).cos()).collect();
        let (l, r) = form_conformal_check(&change, &u, &v);
        assert!((l - r).abs() < 1e-9 * r.abs().max(1.0));
    }
}
