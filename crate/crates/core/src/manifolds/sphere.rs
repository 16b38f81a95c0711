//! Round spheres `S^n` of radius `r` in hyperspherical coordinates.
//!
//! Chart coordinates are `(θ_1, …, θ_{n-1}, φ)` with `θ_k ∈ [0, π]` and
//! `φ ∈ [0, 2π)`; the embedding is
//! `x_1 = cos θ_1, x_2 = sin θ_1 cos θ_2, …, x_{n+1} = sin θ_1 ⋯ sin θ_{n-1} sin φ`.
//!
//! Real orthonormal harmonics are indexed by Gelfand–Tsetlin chains
//! `l = l_1 ≥ l_2 ≥ … ≥ l_{n-1} ≥ |m|` and factor as
//! `∏_k sin^{l_{k+1}} θ_k · p̃^{(l_{k+1} + (n-k)/2)}_{l_k - l_{k+1}}(cos θ_k) · Φ_m(φ)`
//! with `l_n = |m|`, orthonormal Gegenbauer factors and `Φ_m` the real Fourier
//! basis on the circle.

use std::f64::consts::PI;

use super::Mode;
use crate::special::gegenbauer_orthonormal;

/// Enumerate every real harmonic of degree `l` on `S^n` in lexicographic order.
pub(crate) fn modes_of_degree(n: usize, l: usize) -> Vec<Mode> {
    let mut out = Vec::new();
    let mut chain = vec![l as u32];
    fn rec(n: usize, chain: &mut Vec<u32>, out: &mut Vec<Mode>) {
        if chain.len() == n - 1 {
            let last = *chain.last().unwrap() as i32;
            for m in -last..=last {
                out.push(Mode::Sphere {
                    chain: chain.clone(),
                    m,
                });
            }
            return;
        }
        let prev = *chain.last().unwrap();
        for next in 0..=prev {
            chain.push(next);
            rec(n, chain, out);
            chain.pop();
        }
    }
    rec(n, &mut chain, &mut out);
    out
}

/// Embedding of chart coordinates into `R^{n+1}` (unit sphere).
pub(crate) fn embed(angles: &[f64]) -> Vec<f64> {
    let n = angles.len();
    let mut x = Vec::with_capacity(n + 1);
    let mut s = 1.0;
    for &theta in &angles[..n - 1] {
        x.push(s * theta.cos());
        s *= theta.sin();
    }
    let phi = angles[n - 1];
    x.push(s * phi.cos());
    x.push(s * phi.sin());
    x
}

/// Inverse of [`embed`] for a unit vector.
pub(crate) fn chart_from_embedding(x: &[f64]) -> Vec<f64> {
    let n = x.len() - 1;
    let mut angles = Vec::with_capacity(n);
    for k in 0..n - 1 {
        let tail: f64 = x[k + 1..].iter().map(|v| v * v).sum::<f64>().sqrt();
        angles.push(tail.atan2(x[k]));
    }
    let mut phi = x[n].atan2(x[n - 1]);
    if phi < 0.0 {
        phi += 2.0 * PI;
    }
    angles.push(phi);
    angles
}

/// Geodesic angle between two unit vectors, accurate at both small and
/// near-antipodal separations.
pub(crate) fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    let sum: f64 = a.iter().zip(b).map(|(p, q)| (p + q) * (p + q)).sum::<f64>().sqrt();
    2.0 * diff.atan2(sum)
}

/// Per-point tables of the polar factors, shared by every mode evaluated at
/// that point.
pub(crate) struct FactorTables {
    n: usize,
    lmax: usize,
    /// `polar[k][L]` holds `sin^L θ_k p̃^{(L + (n-k-1)/2 + 1/2)}_J(cos θ_k)` for `J = 0..=lmax-L`.
    polar: Vec<Vec<Vec<f64>>>,
    cos_m: Vec<f64>,
    sin_m: Vec<f64>,
}

impl FactorTables {
    pub(crate) fn new(n: usize, lmax: usize, angles: &[f64]) -> Self {
        let mut polar = Vec::with_capacity(n - 1);
        let mut buf = Vec::new();
        for k in 1..n {
            let theta = angles[k - 1];
            let (s, c) = theta.sin_cos();
            let base = 0.5 * (n - k) as f64;
            let mut per_l = Vec::with_capacity(lmax + 1);
            let mut sin_pow = 1.0;
            for big_l in 0..=lmax {
                gegenbauer_orthonormal(big_l as f64 + base, lmax - big_l, c, &mut buf);
                per_l.push(buf.iter().map(|v| v * sin_pow).collect::<Vec<f64>>());
                sin_pow *= s;
            }
            polar.push(per_l);
        }
        let phi = angles[n - 1];
        let cos_m = (0..=lmax).map(|m| (m as f64 * phi).cos()).collect();
        let sin_m = (0..=lmax).map(|m| (m as f64 * phi).sin()).collect();
        Self {
            n,
            lmax,
            polar,
            cos_m,
            sin_m,
        }
    }

    pub(crate) fn eval(&self, chain: &[u32], m: i32) -> f64 {
        debug_assert!(chain[0] as usize <= self.lmax);
        let mut v = 1.0;
        for k in 1..self.n {
            let lk = chain[k - 1] as usize;
            let lnext = if k < self.n - 1 {
                chain[k] as usize
            } else {
                m.unsigned_abs() as usize
            };
            v *= self.polar[k - 1][lnext][lk - lnext];
        }
        let az = if m == 0 {
            1.0 / (2.0 * PI).sqrt()
        } else if m > 0 {
            self.cos_m[m as usize] / PI.sqrt()
        } else {
            self.sin_m[m.unsigned_abs() as usize] / PI.sqrt()
        };
        v * az
    }
}
