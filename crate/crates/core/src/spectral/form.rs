//! The co-polyharmonic form `𝔭(u,v) = Σ ν_j u_j v_j` and its inverse on
//! coefficient vectors indexed like a [`ModeSet`] (index 0 is the constant).

use std::sync::Arc;

use super::gjms::{GridBasis, ModeSet};

#[derive(Clone, Debug)]
pub struct CopolyForm {
    modes: Arc<ModeSet>,
}

impl CopolyForm {
    pub fn new(modes: Arc<ModeSet>) -> Self {
        Self { modes }
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    /// `𝔭(u, v)`.
    pub fn apply(&self, u: &[f64], v: &[f64]) -> f64 {
        copoly_form_apply(&self.modes, u, v)
    }

    /// `𝔨(u, v) = Σ_{j≥1} u_j v_j / (a_n ν_j)`, the covariance form of the field.
    pub fn covariance(&self, u: &[f64], v: &[f64]) -> f64 {
        covariance_form(&self.modes, u, v)
    }
}

pub fn copoly_form_apply(modes: &ModeSet, u: &[f64], v: &[f64]) -> f64 {
    modes.nu().iter().zip(u).zip(v).map(|((n, a), b)| n * a * b).sum()
}

/// Coefficients of `P_g u`.
pub fn copoly_apply(modes: &ModeSet, u: &[f64]) -> Vec<f64> {
    modes.nu().iter().zip(u).map(|(n, a)| n * a).collect()
}

/// Coefficients of `K_g u`: the constant mode is dropped, the rest divided by `ν_j`.
pub fn green_operator_apply(modes: &ModeSet, u: &[f64]) -> Vec<f64> {
    modes
        .nu()
        .iter()
        .zip(u)
        .enumerate()
        .map(|(j, (n, a))| if j == 0 { 0.0 } else { a / n })
        .collect()
}

/// `K_g f` on the grid for a grid function `f`, through its quadrature coefficients.
pub fn green_operator_grid(basis: &GridBasis, f: &[f64]) -> Vec<f64> {
    let c = basis.analyze(f);
    basis.synthesize(&green_operator_apply(basis.modes(), &c))
}

pub fn covariance_form(modes: &ModeSet, u: &[f64], v: &[f64]) -> f64 {
    let a_n = modes.a_n();
    modes
        .nu()
        .iter()
        .zip(u)
        .zip(v)
        .skip(1)
        .map(|((n, a), b)| a * b / (a_n * n))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::ManifoldModel;
    use crate::spectral::GjmsSpectrum;

    #[test]
    fn constant_has_zero_energy_and_first_mode_on_s4() {
        let g = GjmsSpectrum::of(&ManifoldModel::unit_sphere(4).unwrap(), 3).unwrap();
        let m = g.mode_set(5).unwrap();
        let form = CopolyForm::new(m.clone());
        let mut u = vec![0.0; m.len()];
        u[0] = 1.0;
        assert_eq!(form.apply(&u, &u), 0.0);
        let mut v = vec![0.0; m.len()];
        v[1] = 1.0;
        assert!((form.apply(&v, &v) - 24.0).abs() < 1e-12);
    }

    #[test]
    fn green_inverts_copoly_on_grounded_part() {
        let g = GjmsSpectrum::of(&ManifoldModel::unit_sphere(2).unwrap(), 6).unwrap();
        let m = g.mode_set(30).unwrap();
        let u: Vec<f64> = (0..m.len()).map(|j| (j as f64 * 0.7).sin()).collect();
        let back = green_operator_apply(&m, &copoly_apply(&m, &u));
        assert_eq!(back[0], 0.0);
        for j in 1..m.len() {
            assert!((back[j] - u[j]).abs() < 1e-12);
        }
    }
}
