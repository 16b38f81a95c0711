//! Admissibility calculator for Einstein manifolds, usable when only `λ₁`
//! and the Ricci constant are known.

use serde::{Deserialize, Serialize};

use crate::error::{LqgError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Admissible,
    NotAdmissible,
    /// `λ₁` equals the threshold exactly.
    Boundary,
    /// The available bound does not decide the question.
    Inconclusive,
}

/// Verdict for an Einstein manifold with `Ric = -(n-1) κ g`.
///
/// `κ ≤ 0` is always admissible; for `κ > 0` the manifold is admissible iff
/// `λ₁ > n(n-2)κ/4`.
pub fn admissibility_verdict(n: usize, kappa: f64, lambda_1: f64) -> Result<Verdict> {
    if n < 2 || n % 2 != 0 {
        return Err(LqgError::OddDimension(n));
    }
    if !(lambda_1 > 0.0) {
        return Err(LqgError::InvalidParameter(format!(
            "λ₁ must be positive (got {lambda_1})"
        )));
    }
    if kappa <= 0.0 {
        return Ok(Verdict::Admissible);
    }
    let threshold = admissibility_threshold(n, kappa);
    Ok(if lambda_1 > threshold {
        Verdict::Admissible
    } else if lambda_1 == threshold {
        Verdict::Boundary
    } else {
        Verdict::NotAdmissible
    })
}

/// `n(n-2)κ/4`.
pub fn admissibility_threshold(n: usize, kappa: f64) -> f64 {
    (n * (n - 2)) as f64 * kappa / 4.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub verdict: Verdict,
    /// Upper bound for `λ₁(M)`: the first eigenvalue of the surface factor.
    pub witness_eigenvalue: f64,
    /// `n(n-2)/(4(n-1))`, the admissibility threshold of `M = M₁ × M₂`.
    pub threshold: f64,
}

/// Product `M = M₁ × M₂` with `M₁` of dimension `n-2` and curvature
/// `-1/(n-3)`, `M₂` a hyperbolic surface with first eigenvalue `λ₁(M₂)`.
///
/// `M` is Einstein with `κ = 1/(n-1)`, and `λ₁(M) ≤ λ₁(M₂)`; it is certainly
/// not admissible when `λ₁(M₂) ≤ n(n-2)/(4(n-1))`. Above that value the bound
/// decides nothing.
pub fn product_counterexample_spectrum(lambda1_m2: f64, n: usize) -> Result<CounterexampleReport> {
    if n < 4 || n % 2 != 0 {
        return Err(LqgError::InvalidParameter(format!(
            "the product construction needs even n ≥ 4 (got {n})"
        )));
    }
    if !(lambda1_m2 > 0.0) {
        return Err(LqgError::InvalidParameter(format!(
            "λ₁(M₂) must be positive (got {lambda1_m2})"
        )));
    }
    let threshold = admissibility_threshold(n, 1.0 / (n as f64 - 1.0));
    let verdict = if lambda1_m2 <= threshold {
        Verdict::NotAdmissible
    } else {
        Verdict::Inconclusive
    };
    Ok(CounterexampleReport {
        verdict,
        witness_eigenvalue: lambda1_m2,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn einstein_verdicts() {
        assert_eq!(admissibility_verdict(4, 0.0, 1.0).unwrap(), Verdict::Admissible);
        assert_eq!(admissibility_verdict(4, -1.0, 0.1).unwrap(), Verdict::Admissible);
        assert_eq!(admissibility_verdict(4, 1.0, 2.0).unwrap(), Verdict::Boundary);
        assert_eq!(admissibility_verdict(4, 1.0, 2.5).unwrap(), Verdict::Admissible);
        assert_eq!(admissibility_verdict(4, 1.0, 1.5).unwrap(), Verdict::NotAdmissible);
        assert!(admissibility_verdict(3, 1.0, 1.5).is_err());
    }

    #[test]
    fn product_construction() {
        let r = product_counterexample_spectrum(0.5, 4).unwrap();
        assert_eq!(r.verdict, Verdict::NotAdmissible);
        assert!((r.threshold - 2.0 / 3.0).abs() < 1e-15);
        let r = product_counterexample_spectrum(0.667, 4).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        let r = product_counterexample_spectrum(0.1, 6).unwrap();
        assert_eq!(r.verdict, Verdict::NotAdmissible);
        assert!((r.threshold - 1.2).abs() < 1e-15);
    }
}
