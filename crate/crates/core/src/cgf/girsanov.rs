use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{sample_field, FieldSample};
use super::rng::{purpose, RngStream};
use crate::spectral::{copoly_apply, copoly_form_apply, covariance_form, ModeSet};
use crate::stats::Estimate;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GirsanovReport {
    /// `E[F(h + π_g φ)]`.
    pub shifted: Estimate,
    /// `E[F(h) exp(a_n⟨h, P_g φ⟩ - (a_n/2) 𝔭(φ, φ))]`.
    pub weighted: Estimate,
    pub overlap_95: bool,
    /// Effective sample size of the importance weights.
    pub effective_samples: f64,
}

/// Girsanov density `exp(a_n⟨h, P_g φ⟩ - (a_n/2) 𝔭(φ, φ))`.
pub fn girsanov_density(sample: &FieldSample, phi: &[f64]) -> f64 {
    let modes = sample.modes();
    let a_n = modes.a_n();
    let pphi = copoly_apply(modes, phi);
    (a_n * sample.pair(&pphi) - 0.5 * a_n * copoly_form_apply(modes, phi, phi)).exp()
}

/// Both sides by Monte Carlo on independent streams of `seed`.
pub fn girsanov_shift_check<F>(modes: &Arc<ModeSet>, phi: &[f64], f: F, n: usize, seed: u64) -> GirsanovReport
where
    F: Fn(&FieldSample) -> f64 + Sync,
{
    let shifted: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let s = sample_field(modes, &mut RngStream::new(seed, i));
            f(&s.shifted(phi))
        })
        .collect();
    let pairs: Vec<(f64, f64)> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let s = sample_field(modes, &mut RngStream::for_purpose(seed, purpose::AUX, i));
            let w = girsanov_density(&s, phi);
            (f(&s) * w, w)
        })
        .collect();
    let weighted: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let sw: f64 = pairs.iter().map(|p| p.1).sum();
    let sw2: f64 = pairs.iter().map(|p| p.1 * p.1).sum();
    let a = Estimate::from_samples(&shifted);
    let b = Estimate::from_samples(&weighted);
    GirsanovReport {
        shifted: a,
        weighted: b,
        overlap_95: a.overlaps(&b, 0.95),
        effective_samples: sw * sw / sw2,
    }
}

/// Closed forms of both sides for `F(h) = e^{⟨h,u⟩}`:
/// `e^{⟨u, πφ⟩ + 𝔨(u,u)/2}` and `e^{𝔨(u + a_n Pφ, u + a_n Pφ)/2 - (a_n/2)𝔭(φ,φ)}`.
pub fn girsanov_linear_closed_form(modes: &ModeSet, phi: &[f64], u: &[f64]) -> (f64, f64) {
    let a_n = modes.a_n();
    let shift: f64 = u.iter().zip(phi).skip(1).map(|(a, b)| a * b).sum();
    let lhs = (shift + 0.5 * covariance_form(modes, u, u)).exp();
    let pphi = copoly_apply(modes, phi);
    let tilted: Vec<f64> = u.iter().zip(&pphi).map(|(a, p)| a + a_n * p).collect();
    let rhs = (0.5 * covariance_form(modes, &tilted, &tilted) - 0.5 * a_n * copoly_form_apply(modes, phi, phi)).exp();
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::ManifoldModel;
    use crate::spectral::GjmsSpectrum;

    fn modes() -> Arc<ModeSet> {
        GjmsSpectrum::of(&ManifoldModel::unit_sphere(2).unwrap(), 6)
            .unwrap()
            .mode_set(15)
            .unwrap()
    }

    #[test]
    fn linear_case_is_exact() {
        let m = modes();
        let phi: Vec<f64> = (0..m.len()).map(|j| 0.3 * (j as f64).cos()).collect();
        let u: Vec<f64> = (0..m.len()).map(|j| 0.5 * (j as f64 * 0.4).sin()).collect();
        let (l, r) = girsanov_linear_closed_form(&m, &phi, &u);
        assert!((l / r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_shift_has_unit_density() {
        let m = modes();
        let r = girsanov_shift_check(&m, &vec![0.0; m.len()], |s| s.coefficients()[1], 200, 1);
        assert!((r.effective_samples - 200.0).abs() < 1e-9);
    }
}
