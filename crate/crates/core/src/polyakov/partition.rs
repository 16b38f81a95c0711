//! Polyakov–Liouville partition functions and the conformal anomaly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curvature::q_curvature;
use crate::cgf::{derive_seed, purpose, sample_field_at};
use crate::error::{LqgError, Result};
use crate::gmc::{check_subcritical, Flavor, LqgBuilder};
use crate::special::ln_gamma_fn;
use crate::spectral::{a_n_constant, ConformalChange};
use crate::stats::{pairwise_sum, ratio_estimate, Estimate};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolyakovFlavor {
    Plain,
    Adjusted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyakovParams {
    pub flavor: PolyakovFlavor,
    pub gamma: f64,
    #[serde(rename = "Theta")]
    pub theta: f64,
    /// Ignored by the adjusted flavor.
    #[serde(rename = "Theta_star")]
    pub theta_star: f64,
    pub m: f64,
}

impl PolyakovParams {
    /// `Θ = a_n n/γ`, `Θ* = γ`.
    pub fn special_plain(n: usize, gamma: f64, m: f64) -> Self {
        Self {
            flavor: PolyakovFlavor::Plain,
            gamma,
            theta: a_n_constant(n) * n as f64 / gamma,
            theta_star: gamma,
            m,
        }
    }

    /// `Θ = a_n (n/γ + γ/2)`.
    pub fn special_adjusted(n: usize, gamma: f64, m: f64) -> Self {
        Self {
            flavor: PolyakovFlavor::Adjusted,
            gamma,
            theta: a_n_constant(n) * (n as f64 / gamma + 0.5 * gamma),
            theta_star: 0.0,
            m,
        }
    }

    /// Coefficient of `a` in the exponent: `ΘQ(M) + Θ*` (plain) or `ΘQ(M)`.
    pub fn exponent(&self, q_total: f64) -> f64 {
        match self.flavor {
            PolyakovFlavor::Plain => self.theta * q_total + self.theta_star,
            PolyakovFlavor::Adjusted => self.theta * q_total,
        }
    }

    /// Finiteness gates; the boundary is rejected.
    pub fn check(&self, n: usize, q_total: f64) -> Result<()> {
        if !(self.gamma > 0.0) {
            return Err(LqgError::InvalidParameter("γ must be positive".into()));
        }
        check_subcritical(self.gamma, n)?;
        if !(self.m > 0.0) {
            return Err(LqgError::InvalidParameter("m must be positive".into()));
        }
        let c = self.exponent(q_total);
        if !(c < 0.0) {
            let rule = match self.flavor {
                PolyakovFlavor::Plain => "ΘQ(M) + Θ* < 0",
                PolyakovFlavor::Adjusted => "ΘQ(M) < 0",
            };
            return Err(LqgError::GateViolated(format!(
                "{rule} required for a finite partition function, got {c}"
            )));
        }
        Ok(())
    }

    pub fn measure_flavor(&self) -> Flavor {
        match self.flavor {
            PolyakovFlavor::Plain => Flavor::Plain,
            PolyakovFlavor::Adjusted => Flavor::Adjusted,
        }
    }
}

/// `log ∫ exp(−c a − M e^{γa}) da` by the trapezoid rule on a grid around
/// the peak, extended until the log-integrand drops 25 below the maximum.
pub fn a_integral_log(c: f64, gamma: f64, mass: f64) -> f64 {
    let peak = ((-c) / (gamma * mass)).ln() / gamma;
    let f = |a: f64| -c * a - mass * (gamma * a).exp();
    let top = f(peak);
    let h = 0.02 / gamma.max(-c).max(1.0);
    let mut sum = 1.0;
    for dir in [-1.0, 1.0] {
        let mut k = 1.0;
        loop {
            let v = f(peak + dir * k * h) - top;
            sum += v.exp();
            if v < -25.0 {
                break;
            }
            k += 1.0;
        }
    }
    top + (h * sum).ln()
}

/// `log[(1/γ) Γ(−c/γ) M^{c/γ}]`, the closed form of [`a_integral_log`].
pub fn gamma_reduction_log(c: f64, gamma: f64, mass: f64) -> f64 {
    -gamma.ln() + ln_gamma_fn(-c / gamma) + (c / gamma) * mass.ln()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartitionReport {
    pub flavor: PolyakovFlavor,
    pub gamma: f64,
    #[serde(rename = "Theta")]
    pub theta: f64,
    #[serde(rename = "Theta_star")]
    pub theta_star: f64,
    pub m: f64,
    pub q_total: f64,
    pub exponent: f64,
    pub samples: usize,
    #[serde(rename = "Z_routeA")]
    pub route_a: Estimate,
    #[serde(rename = "Z_routeB")]
    pub route_b: Estimate,
    #[serde(rename = "CI_A")]
    pub ci_a: (f64, f64),
    #[serde(rename = "CI_B")]
    pub ci_b: (f64, f64),
    pub overlap_95: bool,
}

/// `Z*` by numerical `a`-integration (route A) and by the Gamma reduction
/// (route B, independent samples).
pub fn partition_function(params: &PolyakovParams, builder: &LqgBuilder, n: usize, seed: u64) -> Result<PartitionReport> {
    let basis = builder.basis();
    let model = basis.modes().model();
    let q = q_curvature(model)?;
    params.check(model.dimension(), q.total)?;
    if builder.flavor() != params.measure_flavor() || builder.gamma() != params.gamma {
        return Err(LqgError::InvalidParameter("measure builder does not match the parameters".into()));
    }
    let c = params.exponent(q.total);
    let q_coeffs = basis.analyze(&vec![q.value; basis.n_points()]);
    let draw = |s: u64, i: u64| -> (f64, f64) {
        let sample = sample_field_at(basis.modes(), s, i);
        let mass = pairwise_sum(&builder.weights(sample.coefficients()));
        (sample.pair(&q_coeffs), params.m * mass)
    };
    let seed_b = derive_seed(seed, purpose::ROUTE_B);
    let (a, b): (Vec<f64>, Vec<f64>) = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let (qa, ma) = draw(seed, i);
            let (qb, mb) = draw(seed_b, i);
            (
                (-params.theta * qa + a_integral_log(c, params.gamma, ma)).exp(),
                (-params.theta * qb + gamma_reduction_log(c, params.gamma, mb)).exp(),
            )
        })
        .unzip();
    let route_a = Estimate::from_samples(&a);
    let route_b = Estimate::from_samples(&b);
    Ok(PartitionReport {
        flavor: params.flavor,
        gamma: params.gamma,
        theta: params.theta,
        theta_star: params.theta_star,
        m: params.m,
        q_total: q.total,
        exponent: c,
        samples: n,
        ci_a: route_a.ci(0.95),
        ci_b: route_b.ci(0.95),
        overlap_95: route_a.overlaps(&route_b, 0.95),
        route_a,
        route_b,
    })
}

/// Plain anomaly
/// `Z(g,φ) = exp(ΘQ(M)[(n/γ)⟨φ⟩_g − (γ/2)V] + n⟨φ⟩_{g'} + a_n n² 𝔭(φ,φ)/(2γ²))`.
pub fn plain_anomaly(change: &ConformalChange, gamma: f64, q_total: f64) -> f64 {
    let n = change.basis().modes().model().dimension() as f64;
    let a_n = change.basis().modes().a_n();
    let theta = a_n * n / gamma;
    (theta * q_total * (n / gamma * change.phi_mean() - 0.5 * gamma * change.xi_variance())
        + n * change.phi_mean_prime()
        + a_n * n * n * change.phi_energy() / (2.0 * gamma * gamma))
        .exp()
}

/// Adjusted anomaly `Z̄(g,φ) = exp(Θ²/(2a_n)[𝔭(φ,φ) + 2∫φ Q_g dvol_g])`.
pub fn adjusted_anomaly(change: &ConformalChange, gamma: f64, q_total: f64) -> f64 {
    let n = change.basis().modes().model().dimension() as f64;
    let a_n = change.basis().modes().a_n();
    let theta = a_n * (n / gamma + 0.5 * gamma);
    (theta * theta / (2.0 * a_n) * (change.phi_energy() + 2.0 * q_total * change.phi_mean())).exp()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub flavor: PolyakovFlavor,
    pub gamma: f64,
    #[serde(rename = "Theta")]
    pub theta: f64,
    #[serde(rename = "Theta_star")]
    pub theta_star: f64,
    pub m: f64,
    /// Tempering exponent `β` of `F(h) = exp(−β⟨h⟩_{g'})`.
    pub beta: f64,
    pub samples: usize,
    pub anomaly_pred: f64,
    pub anomaly_est: Estimate,
    pub contains_95: bool,
    /// CI half-width above 20% of the estimate.
    pub inconclusive: bool,
    /// Samples needed for a 5% relative standard error.
    pub required_samples: usize,
}

/// `∫F dν*_{g'} / ∫F∘T dν*_g` against the closed-form anomaly, where the
/// tempering `F` makes both sides finite with `a`-exponent `−1`. Both sides
/// use the same field draws.
pub fn conformal_anomaly_check(params: &PolyakovParams, builder: &LqgBuilder, change: &ConformalChange, n: usize, seed: u64) -> Result<AnomalyReport> {
    let basis = builder.basis();
    let modes = basis.modes();
    let model = modes.model();
    let dim = model.dimension();
    let nf = dim as f64;
    let gamma = params.gamma;
    let q = q_curvature(model)?;
    let special = match params.flavor {
        PolyakovFlavor::Plain => PolyakovParams::special_plain(dim, gamma, params.m),
        PolyakovFlavor::Adjusted => PolyakovParams::special_adjusted(dim, gamma, params.m),
    };
    if (special.theta - params.theta).abs() > 1e-12 * special.theta.abs()
        || (params.flavor == PolyakovFlavor::Plain && (special.theta_star - params.theta_star).abs() > 1e-12)
    {
        return Err(LqgError::InvalidParameter("anomaly check needs the special values of Θ, Θ*".into()));
    }
    if !(params.m > 0.0) {
        return Err(LqgError::InvalidParameter("m must be positive".into()));
    }
    if builder.flavor() != params.measure_flavor() || builder.gamma() != gamma {
        return Err(LqgError::InvalidParameter("measure builder does not match the parameters".into()));
    }
    let c = -1.0;
    let theta_star = match params.flavor {
        PolyakovFlavor::Plain => params.theta_star,
        PolyakovFlavor::Adjusted => 0.0,
    };
    let beta = c - params.theta * q.total - theta_star;
    let phi = change.phi();
    let log_factor: Vec<f64> = match params.flavor {
        PolyakovFlavor::Plain => phi
            .iter()
            .zip(change.phi_bar())
            .map(|(p, pb)| nf * p + 0.5 * gamma * gamma * pb)
            .collect(),
        PolyakovFlavor::Adjusted => phi.iter().map(|p| (nf + 0.5 * gamma * gamma) * p).collect(),
    };
    let factor: Vec<f64> = log_factor.iter().map(|v| v.exp()).collect();
    let p_phi: Vec<f64> = modes.nu().iter().zip(change.phi_coeffs()).map(|(a, b)| a * b).collect();
    // ⟨T-shift⟩_{g'}
    let shift_mean = match params.flavor {
        PolyakovFlavor::Plain => (nf / gamma) * change.phi_mean_prime() + 0.5 * gamma * change.xi_variance(),
        PolyakovFlavor::Adjusted => params.theta / modes.a_n() * change.phi_mean_prime(),
    };
    let (lhs, rhs): (Vec<f64>, Vec<f64>) = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let s = sample_field_at(modes, seed, i);
            let coeffs = s.coefficients();
            let mu = builder.weights(coeffs);
            let mass = pairwise_sum(&mu);
            let w: Vec<f64> = mu.iter().zip(&factor).map(|(a, b)| a * b).collect();
            let w_mass = pairwise_sum(&w);
            let xi = change.xi(coeffs);
            let pair = s.pair(&p_phi);
            let l = -params.theta * pair - (theta_star + beta) * xi + (c / gamma) * (params.m * w_mass).ln();
            let r = -beta * xi + (c / gamma) * (params.m * mass).ln();
            (l.exp(), r.exp())
        })
        .unzip();
    let raw = ratio_estimate(&lhs, &rhs);
    let scale = (-beta * shift_mean).exp();
    let est = Estimate {
        value: raw.value * scale,
        std_err: raw.std_err * scale,
    };
    let anomaly_pred = match params.flavor {
        PolyakovFlavor::Plain => plain_anomaly(change, gamma, q.total),
        PolyakovFlavor::Adjusted => adjusted_anomaly(change, gamma, q.total),
    };
    let rel = est.std_err / est.value.abs().max(f64::MIN_POSITIVE);
    Ok(AnomalyReport {
        flavor: params.flavor,
        gamma,
        theta: params.theta,
        theta_star,
        m: params.m,
        beta,
        samples: n,
        anomaly_pred,
        contains_95: est.contains(anomaly_pred, 0.95),
        inconclusive: 1.96 * rel > 0.2,
        required_samples: ((rel / 0.05).powi(2) * n as f64).ceil() as usize,
        anomaly_est: est,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmc::Scheme;
    use crate::manifolds::ManifoldModel;
    use crate::spectral::GjmsSpectrum;
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn a_integral_matches_gamma() {
        for (c, g, m) in [(-1.0, 1.0, 3.0), (-0.3, 1.5, 0.2), (-4.0, 0.5, 50.0)] {
            let a = a_integral_log(c, g, m);
            let b = gamma_reduction_log(c, g, m);
            assert!((a - b).abs() < 1e-10, "{a} {b}");
        }
    }

    #[test]
    fn gates() {
        let q = 4.0 * PI;
        let p = PolyakovParams {
            flavor: PolyakovFlavor::Plain,
            gamma: 1.0,
            theta: 1.0 / PI,
            theta_star: -5.0,
            m: 1.0,
        };
        assert!(p.check(2, q).is_ok());
        let boundary = PolyakovParams { theta_star: -4.0, ..p };
        assert!(matches!(boundary.check(2, q), Err(LqgError::GateViolated(_))));
        assert!(PolyakovParams::special_adjusted(2, 1.0, 1.0).check(2, q).is_err());
        assert!(PolyakovParams { gamma: 2.0, ..p }.check(2, q).is_err());
        assert!(PolyakovParams { m: 0.0, ..p }.check(2, q).is_err());
    }

    fn s2_basis() -> Arc<crate::spectral::GridBasis> {
        let model = ManifoldModel::unit_sphere(2).unwrap();
        let modes = GjmsSpectrum::of(&model, 8).unwrap().mode_set(24).unwrap();
        Arc::new(modes.basis(Arc::new(model.quadrature(12).unwrap())))
    }

    #[test]
    fn zero_phi_anomaly_is_one() {
        let basis = s2_basis();
        let change = ConformalChange::new(basis.clone(), &vec![0.0; basis.n_modes()]).unwrap();
        for flavor in [Flavor::Plain, Flavor::Adjusted] {
            let b = LqgBuilder::from_basis(basis.clone(), 1.0, flavor, Scheme::Eigenfunction).unwrap();
            let p = match flavor {
                Flavor::Plain => PolyakovParams::special_plain(2, 1.0, 1.0),
                _ => PolyakovParams::special_adjusted(2, 1.0, 1.0),
            };
            let r = conformal_anomaly_check(&p, &b, &change, 200, 1).unwrap();
            assert!((r.anomaly_pred - 1.0).abs() < 1e-12);
            assert!((r.anomaly_est.value - 1.0).abs() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn constant_phi_closed_form() {
        let basis = s2_basis();
        let mut phi = vec![0.0; basis.n_modes()];
        let c = 0.1;
        phi[0] = c * (4.0 * PI).sqrt();
        let change = ConformalChange::new(basis, &phi).unwrap();
        let a_n = a_n_constant(2);
        let theta = a_n * 2.5;
        let expected = (theta * theta / a_n * c * 4.0 * PI).exp();
        assert!((adjusted_anomaly(&change, 1.0, 4.0 * PI) - expected).abs() < 1e-10 * expected);
    }
}

