use serde::{Deserialize, Serialize};

use crate::error::{LqgError, Result};
use crate::manifolds::{ManifoldKind, ManifoldModel};
use crate::special::gamma_fn;
use crate::spectral::{a_n_constant, copoly_apply, GridBasis};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QCurvature {
    pub dimension: usize,
    /// Constant `Q_g` of the Einstein base.
    pub value: f64,
    /// `Q(M) = ∫ Q_g dvol_g`.
    pub total: f64,
    pub euler_characteristic: i64,
    /// `χ(M)/a_n`, the total Q of a conformally flat model.
    pub gauss_bonnet: Option<f64>,
}

/// `Q_g = (n−1)! (k/(n−1))^{n/2}` on Einstein models.
pub fn q_curvature(model: &ManifoldModel) -> Result<QCurvature> {
    let n = model.dimension();
    let k = model
        .einstein_constant()
        .ok_or_else(|| LqgError::Unsupported("Q-curvature of a non-Einstein model".into()))?;
    let value = gamma_fn(n as f64) * (k / (n as f64 - 1.0)).powi(n as i32 / 2);
    let chi = model.euler_characteristic();
    let conformally_flat = matches!(model.kind(), ManifoldKind::Sphere { .. } | ManifoldKind::FlatTorus { .. });
    Ok(QCurvature {
        dimension: n,
        value,
        total: value * model.volume(),
        euler_characteristic: chi,
        gauss_bonnet: conformally_flat.then(|| chi as f64 / a_n_constant(n)),
    })
}

/// Grid values of `Q_{g'} = e^{−nφ}(Q_g + P_g φ)` for `g' = e^{2φ}g`.
pub fn q_transform(q: &QCurvature, basis: &GridBasis, phi: &[f64]) -> Vec<f64> {
    let n = q.dimension as f64;
    let p_phi = basis.synthesize(&copoly_apply(basis.modes(), phi));
    let phi_grid = basis.synthesize(phi);
    phi_grid
        .iter()
        .zip(&p_phi)
        .map(|(f, p)| (-n * f).exp() * (q.value + p))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TotalQCheck {
    pub total_g: f64,
    pub total_g_prime: f64,
    pub rel_discrepancy: f64,
    pub pass: bool,
}

/// `∫ Q_{g'} dvol_{g'}` against `∫ Q_g dvol_g`, both by quadrature.
pub fn total_q_invariance_check(basis: &GridBasis, phi: &[f64]) -> Result<TotalQCheck> {
    let model = basis.modes().model();
    let q = q_curvature(model)?;
    let n = q.dimension as f64;
    let w = basis.grid().weights();
    let qp = q_transform(&q, basis, phi);
    let phi_grid = basis.synthesize(phi);
    let terms: Vec<f64> = (0..w.len()).map(|i| w[i] * qp[i] * (n * phi_grid[i]).exp()).collect();
    let total_g_prime = crate::stats::pairwise_sum(&terms);
    let total_g = q.value * basis.grid().total_weight();
    let rel = (total_g_prime - total_g).abs() / total_g.abs().max(1.0);
    Ok(TotalQCheck {
        total_g,
        total_g_prime,
        rel_discrepancy: rel,
        pass: rel < 1e-6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_values() {
        let s4 = q_curvature(&ManifoldModel::unit_sphere(4).unwrap()).unwrap();
        assert!((s4.value - 6.0).abs() < 1e-12);
        assert!((s4.total - s4.gauss_bonnet.unwrap()).abs() < 1e-9);
        let s2 = q_curvature(&ManifoldModel::unit_sphere(2).unwrap()).unwrap();
        assert!((s2.total - 4.0 * PI).abs() < 1e-12);
        let t = q_curvature(&ManifoldModel::torus(vec![1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(t.value, 0.0);
        assert_eq!(t.gauss_bonnet, Some(0.0));
    }
}
