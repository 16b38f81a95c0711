//! Orthogonal polynomials, Gauss rules and Gamma-function helpers.
//!
//! Everything on spheres is expressed through ultraspherical (Gegenbauer)
//! polynomials `C_j^{(λ)}`, orthogonal on `[-1, 1]` with weight
//! `(1 - t²)^{λ - 1/2}`. Two normalizations are used:
//!
//! * orthonormal `p̃_j^{(λ)}` (unit L² norm against the weight), evaluated by
//!   the symmetric three-term recurrence of the Jacobi matrix;
//! * ratio `C_j^{(λ)}(t) / C_j^{(λ)}(1)`, which is what the addition theorem
//!   produces for sums over a full eigenspace.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::{gamma, ln_gamma};

/// Off-diagonal entry `b_j` (j ≥ 1) of the Jacobi matrix for weight
/// `(1 - t²)^{λ - 1/2}`.
fn gegenbauer_offdiag(j: usize, lambda: f64) -> f64 {
    let j = j as f64;
    0.5 * (j * (j + 2.0 * lambda - 1.0) / ((j + lambda) * (j + lambda - 1.0))).sqrt()
}

/// `∫_{-1}^{1} (1 - t²)^{λ - 1/2} dt`.
pub fn gegenbauer_weight_mass(lambda: f64) -> f64 {
    (0.5 * std::f64::consts::PI.ln() + ln_gamma(lambda + 0.5) - ln_gamma(lambda + 1.0)).exp()
}

/// Orthonormal Gegenbauer polynomials `p̃_0..p̃_{jmax}` at `t`.
pub fn gegenbauer_orthonormal(lambda: f64, jmax: usize, t: f64, out: &mut Vec<f64>) {
    out.clear();
    out.reserve(jmax + 1);
    let p0 = 1.0 / gegenbauer_weight_mass(lambda).sqrt();
    out.push(p0);
    if jmax == 0 {
        return;
    }
    let b1 = gegenbauer_offdiag(1, lambda);
    out.push(t * p0 / b1);
    for j in 1..jmax {
        let bj = gegenbauer_offdiag(j, lambda);
        let bj1 = gegenbauer_offdiag(j + 1, lambda);
        let next = (t * out[j] - bj * out[j - 1]) / bj1;
        out.push(next);
    }
}

/// Single orthonormal Gegenbauer value `p̃_j^{(λ)}(t)`.
pub fn gegenbauer_orthonormal_at(lambda: f64, j: usize, t: f64) -> f64 {
    let mut buf = Vec::new();
    gegenbauer_orthonormal(lambda, j, t, &mut buf);
    buf[j]
}

/// Ratios `C_l^{(λ)}(t) / C_l^{(λ)}(1)` for `l = 0..=lmax`, `λ > 0`.
///
/// For `λ = 1/2` these are the Legendre polynomials.
pub fn gegenbauer_ratio(lambda: f64, lmax: usize, t: f64, out: &mut Vec<f64>) {
    out.clear();
    out.reserve(lmax + 1);
    out.push(1.0);
    if lmax == 0 {
        return;
    }
    out.push(t);
    for l in 1..lmax {
        let lf = l as f64;
        let next = (2.0 * (lf + lambda) * t * out[l] - lf * out[l - 1]) / (lf + 2.0 * lambda);
        out.push(next);
    }
}

/// Legendre polynomial `P_l(t)` by the three-term recurrence.
pub fn legendre(l: usize, t: f64) -> f64 {
    let mut buf = Vec::new();
    gegenbauer_ratio(0.5, l, t, &mut buf);
    buf[l]
}

/// Gauss rule for `∫_{-1}^{1} f(t) (1 - t²)^{α} dt` with `n` nodes
/// (Golub–Welsch on the Gegenbauer Jacobi matrix, `λ = α + 1/2`).
///
/// Exact for polynomials of degree `≤ 2n - 1`. Nodes are returned ascending.
pub fn gauss_jacobi_symmetric(n: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss rule needs at least one node");
    let lambda = alpha + 0.5;
    let mass = gegenbauer_weight_mass(lambda);
    if n == 1 {
        return (vec![0.0], vec![mass]);
    }
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for j in 1..n {
        let b = gegenbauer_offdiag(j, lambda);
        jac[(j, j - 1)] = b;
        jac[(j - 1, j)] = b;
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mass * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Newton polish on the orthonormal recurrence keeps nodes at full precision
    // for the larger rules used by fine grids.
    let mut buf = Vec::new();
    for p in pairs.iter_mut() {
        for _ in 0..3 {
            gegenbauer_orthonormal(lambda, n, p.0, &mut buf);
            let pn = buf[n];
            let dp = derivative_orthonormal(lambda, n, p.0, &buf);
            if dp.abs() < 1e-300 {
                break;
            }
            let step = pn / dp;
            p.0 -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
    }
    // symmetric rule: enforce exact symmetry of nodes and weights
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let t = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[j].1 + pairs[i].1);
        pairs[i] = (-t, w);
        pairs[j] = (t, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}

/// Derivative of `p̃_n^{(λ)}` at `t` from values `p̃_0..p̃_n` (recurrence on
/// derivatives).
fn derivative_orthonormal(lambda: f64, n: usize, t: f64, vals: &[f64]) -> f64 {
    let mut d = vec![0.0; n + 1];
    if n == 0 {
        return 0.0;
    }
    let b1 = gegenbauer_offdiag(1, lambda);
    d[1] = vals[0] / b1;
    for j in 1..n {
        let bj = gegenbauer_offdiag(j, lambda);
        let bj1 = gegenbauer_offdiag(j + 1, lambda);
        d[j + 1] = (vals[j] + t * d[j] - bj * d[j - 1]) / bj1;
    }
    d[n]
}

/// Gauss–Legendre nodes/weights on `[a, b]`.
pub fn gauss_legendre_interval(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (t, w) = gauss_jacobi_symmetric(n, 0.0);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        t.iter().map(|x| mid + half * x).collect(),
        w.iter().map(|x| half * x).collect(),
    )
}

/// Euler Gamma function.
pub fn gamma_fn(x: f64) -> f64 {
    gamma(x)
}

/// Natural log of the Gamma function.
pub fn ln_gamma_fn(x: f64) -> f64 {
    ln_gamma(x)
}

/// `ln C(a, b)` for real arguments via log-Gamma.
pub fn ln_binomial(a: f64, b: f64) -> f64 {
    ln_gamma(a + 1.0) - ln_gamma(b + 1.0) - ln_gamma(a - b + 1.0)
}

/// Volume of the unit round sphere `S^n ⊂ R^{n+1}`.
pub fn unit_sphere_volume(n: usize) -> f64 {
    // |S^n| = 2π/(n-1) |S^{n-2}|
    let mut v = if n % 2 == 0 { 2.0 } else { 2.0 * std::f64::consts::PI };
    let mut k = if n % 2 == 0 { 0 } else { 1 };
    while k < n {
        k += 2;
        v *= 2.0 * std::f64::consts::PI / (k - 1) as f64;
    }
    v
}

/// Dimension of the space of degree-`l` spherical harmonics on `S^n`.
pub fn spherical_harmonic_dimension(n: usize, l: usize) -> usize {
    // C(l+n, n) - C(l+n-2, n)
    fn binom(a: usize, b: usize) -> u128 {
        if b > a {
            return 0;
        }
        let b = b.min(a - b);
        let mut r: u128 = 1;
        for i in 0..b {
            r = r * (a - i) as u128 / (i + 1) as u128;
        }
        r
    }
    let top = binom(l + n, n);
    let bottom = if l >= 2 { binom(l + n - 2, n) } else { 0 };
    (top - bottom) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_matches_closed_forms() {
        let t: f64 = 0.37;
        assert_relative_eq!(legendre(2, t), 0.5 * (3.0 * t * t - 1.0), epsilon = 1e-15);
        assert_relative_eq!(
            legendre(3, t),
            0.5 * (5.0 * t.powi(3) - 3.0 * t),
            epsilon = 1e-15
        );
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_jacobi_symmetric(6, 0.0);
        // ∫ t^10 dt over [-1,1] = 2/11
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert_relative_eq!(s, 2.0 / 11.0, epsilon = 1e-14);
        let total: f64 = w.iter().sum();
        assert_relative_eq!(total, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn gauss_jacobi_weighted_moments() {
        // weight (1-t²): ∫ t² (1-t²) dt = 2/3 - 2/5 = 4/15
        let (x, w) = gauss_jacobi_symmetric(4, 1.0);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert_relative_eq!(s, 4.0 / 15.0, epsilon = 1e-14);
        // weight (1-t²)^{1/2}: total mass π/2
        let (_, w) = gauss_jacobi_symmetric(5, 0.5);
        assert_relative_eq!(w.iter().sum::<f64>(), std::f64::consts::FRAC_PI_2, epsilon = 1e-14);
    }

    #[test]
    fn large_gauss_rule_is_accurate() {
        let (x, w) = gauss_jacobi_symmetric(150, 0.0);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * (3.0 * x).cos()).sum();
        assert_relative_eq!(s, 2.0 * 3.0f64.sin() / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn orthonormal_family_is_orthonormal() {
        for &lambda in &[0.5, 1.0, 1.5, 3.5] {
            let (x, w) = gauss_jacobi_symmetric(20, lambda - 0.5);
            let mut buf = Vec::new();
            let mut gram = vec![vec![0.0; 8]; 8];
            for (xi, wi) in x.iter().zip(&w) {
                gegenbauer_orthonormal(lambda, 7, *xi, &mut buf);
                for a in 0..8 {
                    for b in 0..8 {
                        gram[a][b] += wi * buf[a] * buf[b];
                    }
                }
            }
            for a in 0..8 {
                for b in 0..8 {
                    let e = if a == b { 1.0 } else { 0.0 };
                    assert!((gram[a][b] - e).abs() < 1e-12, "λ={lambda} ({a},{b})");
                }
            }
        }
    }

    #[test]
    fn ratio_recurrence_is_one_at_one() {
        let mut buf = Vec::new();
        gegenbauer_ratio(1.5, 30, 1.0, &mut buf);
        assert!(buf.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn harmonic_dimensions() {
        assert_eq!(spherical_harmonic_dimension(2, 3), 7);
        assert_eq!(spherical_harmonic_dimension(4, 1), 5);
        assert_eq!(spherical_harmonic_dimension(4, 2), 14);
        assert_relative_eq!(unit_sphere_volume(2), 4.0 * std::f64::consts::PI, epsilon = 1e-14);
        assert_relative_eq!(
            unit_sphere_volume(4),
            8.0 * std::f64::consts::PI.powi(2) / 3.0,
            epsilon = 1e-13
        );
    }
}
