//! Monte Carlo summaries. All reductions run sequentially over sample-ordered
//! vectors, so results do not depend on how the samples were produced.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

pub fn normal_cdf(z: f64) -> f64 {
    std_normal().cdf(z)
}

pub fn normal_quantile(p: f64) -> f64 {
    std_normal().inverse_cdf(p)
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

pub fn mean(v: &[f64]) -> f64 {
    pairwise_sum(v) / v.len() as f64
}

/// Unbiased sample variance.
pub fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    let sq: Vec<f64> = v.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&sq) / (v.len() as f64 - 1.0)
}

pub fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let p: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    pairwise_sum(&p) / (a.len() as f64 - 1.0)
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

impl Estimate {
    pub fn from_samples(v: &[f64]) -> Self {
        Self {
            value: mean(v),
            std_err: (variance(v) / v.len() as f64).sqrt(),
        }
    }

    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_err: 0.0,
        }
    }

    /// Two-sided confidence interval at the given level.
    pub fn ci(&self, level: f64) -> (f64, f64) {
        let z = normal_quantile(0.5 + 0.5 * level);
        (self.value - z * self.std_err, self.value + z * self.std_err)
    }

    pub fn contains(&self, x: f64, level: f64) -> bool {
        let (lo, hi) = self.ci(level);
        lo <= x && x <= hi
    }

    /// `|value - x| ≤ k σ`.
    pub fn within_sigma(&self, x: f64, k: f64) -> bool {
        (self.value - x).abs() <= k * self.std_err
    }

    pub fn overlaps(&self, other: &Estimate, level: f64) -> bool {
        let (a0, a1) = self.ci(level);
        let (b0, b1) = other.ci(level);
        a0 <= b1 && b0 <= a1
    }

    /// Standardized difference of two independent estimates.
    pub fn z_difference(&self, other: &Estimate) -> f64 {
        let s = (self.std_err.powi(2) + other.std_err.powi(2)).sqrt();
        if s == 0.0 {
            if self.value == other.value {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - other.value) / s
        }
    }
}

/// Unbiased estimate of `Cov(a, b)` with a standard error from the
/// per-sample products.
pub fn covariance_estimate(a: &[f64], b: &[f64]) -> Estimate {
    let n = a.len() as f64;
    let (ma, mb) = (mean(a), mean(b));
    let p: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    let c = pairwise_sum(&p) / (n - 1.0);
    Estimate {
        value: c,
        std_err: (variance(&p) / n).sqrt(),
    }
}

/// Ratio of means `E[a]/E[b]` from paired samples, delta-method error.
pub fn ratio_estimate(a: &[f64], b: &[f64]) -> Estimate {
    let n = a.len() as f64;
    let (ma, mb) = (mean(a), mean(b));
    let r = ma / mb;
    let resid: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - r * y).collect();
    let var = variance(&resid) / (n * mb * mb);
    Estimate {
        value: r,
        std_err: var.sqrt(),
    }
}

/// OLS fit `y = α + β x` with heteroskedasticity-robust (HC1) errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub intercept: Estimate,
    pub slope: Estimate,
}

pub fn ols_robust(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len() as f64;
    let (mx, my) = (mean(x), mean(y));
    let sxx = pairwise_sum(&x.iter().map(|v| (v - mx) * (v - mx)).collect::<Vec<_>>());
    let sxy = pairwise_sum(
        &x.iter()
            .zip(y)
            .map(|(a, b)| (a - mx) * (b - my))
            .collect::<Vec<_>>(),
    );
    let beta = sxy / sxx;
    let alpha = my - beta * mx;
    // sandwich (XᵀX)⁻¹ Xᵀ diag(e²) X (XᵀX)⁻¹ with X = [1, x]
    let (mut s00, mut s01, mut s11) = (0.0, 0.0, 0.0);
    let mut sx = 0.0;
    let mut sxx_raw = 0.0;
    for (a, b) in x.iter().zip(y) {
        let e = b - alpha - beta * a;
        let e2 = e * e;
        s00 += e2;
        s01 += e2 * a;
        s11 += e2 * a * a;
        sx += a;
        sxx_raw += a * a;
    }
    let det = n * sxx_raw - sx * sx;
    let (i00, i01, i11) = (sxx_raw / det, -sx / det, n / det);
    let v00 = i00 * (i00 * s00 + i01 * s01) + i01 * (i00 * s01 + i01 * s11);
    let v11 = i01 * (i01 * s00 + i11 * s01) + i11 * (i01 * s01 + i11 * s11);
    let hc1 = n / (n - 2.0);
    LinearFit {
        intercept: Estimate {
            value: alpha,
            std_err: (hc1 * v00).sqrt(),
        },
        slope: Estimate {
            value: beta,
            std_err: (hc1 * v11).sqrt(),
        },
    }
}

/// Least-squares slope of `y ≈ c x` through the origin.
pub fn slope_through_origin(x: &[f64], y: &[f64]) -> f64 {
    let xy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let xx: f64 = x.iter().map(|a| a * a).sum();
    xy / xx
}

/// Ordinary least-squares slope and intercept (no error model).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Empirical quantile by linear interpolation of order statistics.
pub fn quantile(v: &[f64], q: f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let pos = q * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    s[lo] + (pos - lo as f64) * (s[hi] - s[lo])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_of_normal() {
        assert!((normal_quantile(0.975) - 1.959963984540054).abs() < 1e-9);
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ols_recovers_exact_line() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 + 3.0 * v).collect();
        let f = ols_robust(&x, &y);
        assert!((f.slope.value - 3.0).abs() < 1e-12);
        assert!((f.intercept.value - 2.0).abs() < 1e-12);
        assert!(f.slope.std_err < 1e-10);
    }

    #[test]
    fn ols_robust_matches_closed_form_two_points_per_x() {
        // residuals ±1 at every x: HC0 variance of the slope is Σ(x-x̄)²/Sxx²
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..10 {
            let v = i as f64;
            x.push(v);
            y.push(v + 1.0);
            x.push(v);
            y.push(v - 1.0);
        }
        let f = ols_robust(&x, &y);
        let sxx: f64 = x.iter().map(|v| (v - 4.5) * (v - 4.5)).sum();
        let expected = (20.0 / 18.0 / sxx).sqrt();
        assert!((f.slope.std_err - expected).abs() < 1e-12);
    }

    #[test]
    fn ratio_of_proportional_samples_is_exact() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [2.0, 4.0, 6.0, 8.0];
        let r = ratio_estimate(&a, &b);
        assert!((r.value - 0.5).abs() < 1e-15);
        assert!(r.std_err < 1e-15);
    }
}
