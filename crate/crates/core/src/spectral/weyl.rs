use serde::{Deserialize, Serialize};

use super::gjms::GjmsSpectrum;
use crate::error::{LqgError, Result};
use crate::special::gamma_fn;
use crate::stats::slope_through_origin;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    pub count: usize,
    pub slope: f64,
    /// `(2π)^n / (ω_n vol(M))`, the slope predicted by Weyl's law.
    pub predicted_slope: f64,
    /// `max |ν_j - c j| / j^{1-1/n}` over the first and second halves of the range.
    pub scaled_residual_first_half: f64,
    pub scaled_residual_second_half: f64,
    pub monotone: bool,
    pub bounded: bool,
}

/// `(2π)^n / (ω_n vol)` with `ω_n` the volume of the Euclidean unit ball.
pub fn weyl_slope(n: usize, volume: f64) -> f64 {
    let nf = n as f64;
    let omega = std::f64::consts::PI.powf(0.5 * nf) / gamma_fn(0.5 * nf + 1.0);
    (2.0 * std::f64::consts::PI).powf(nf) / (omega * volume)
}

/// Fit `ν_j ≈ c j` through the origin and check that the scaled residual does
/// not grow: the second-half maximum may be at most twice the first-half maximum.
pub fn weyl_check(spec: &GjmsSpectrum) -> Result<WeylReport> {
    let nu = spec.nu_with_multiplicity();
    let count = nu.len() - 1;
    if count < 500 {
        return Err(LqgError::InvalidParameter(format!(
            "Weyl fit needs at least 500 eigenvalues (got {count})"
        )));
    }
    let n = spec.model().dimension();
    let j: Vec<f64> = (1..=count).map(|j| j as f64).collect();
    let y = &nu[1..];
    let slope = slope_through_origin(&j, y);
    let expo = 1.0 - 1.0 / n as f64;
    let scaled: Vec<f64> = j
        .iter()
        .zip(y)
        .map(|(j, v)| (v - slope * j).abs() / j.powf(expo))
        .collect();
    let half = count / 2;
    let first = scaled[..half].iter().cloned().fold(0.0, f64::max);
    let second = scaled[half..].iter().cloned().fold(0.0, f64::max);
    Ok(WeylReport {
        count,
        slope,
        predicted_slope: weyl_slope(n, spec.model().volume()),
        scaled_residual_first_half: first,
        scaled_residual_second_half: second,
        monotone: y.windows(2).all(|w| w[0] <= w[1]),
        bounded: second <= 2.0 * first,
    })
}
