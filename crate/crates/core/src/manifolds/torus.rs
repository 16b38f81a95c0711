//! Flat tori `R^n / ∏ L_i Z` with the real Fourier basis
//! `1/√V`, `√(2/V) cos(2π k·x/L)`, `√(2/V) sin(2π k·x/L)` over a half lattice.

use std::f64::consts::PI;

use super::FourierPart;

/// Lattice vectors with `|k|² ≤ cutoff²` whose first nonzero entry is positive,
/// plus the origin.
pub(crate) fn half_lattice_ball(n: usize, cutoff: usize) -> Vec<Vec<i32>> {
    let c = cutoff as i32;
    let r2 = (cutoff * cutoff) as i64;
    let mut out = Vec::new();
    let mut k = vec![-c; n];
    loop {
        let norm: i64 = k.iter().map(|v| (*v as i64) * (*v as i64)).sum();
        if norm <= r2 {
            let first = k.iter().find(|v| **v != 0);
            if first.map_or(true, |v| *v > 0) {
                out.push(k.clone());
            }
        }
        // odometer
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if k[i] < c {
                k[i] += 1;
                break;
            }
            k[i] = -c;
        }
    }
}

pub(crate) fn eigenvalue(sides: &[f64], k: &[i32]) -> f64 {
    sides
        .iter()
        .zip(k)
        .map(|(l, ki)| {
            let w = 2.0 * PI * *ki as f64 / l;
            w * w
        })
        .sum()
}

/// `2π Σ k_i x_i / L_i`.
pub(crate) fn phase(sides: &[f64], k: &[i32], x: &[f64]) -> f64 {
    sides
        .iter()
        .zip(k)
        .zip(x)
        .map(|((l, ki), xi)| 2.0 * PI * *ki as f64 * xi / l)
        .sum()
}

pub(crate) fn distance(sides: &[f64], x: &[f64], y: &[f64]) -> f64 {
    sides
        .iter()
        .zip(x.iter().zip(y))
        .map(|(l, (a, b))| {
            let d = (a - b).rem_euclid(*l);
            let d = d.min(l - d);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Powers of `e^{2πi x_j / L_j}` per axis, so each mode costs a few complex
/// multiplications.
pub(crate) struct PhaseTable {
    kmax: usize,
    /// per axis: (cos, sin) of `2π k x_j / L_j` for `k = 0..=kmax`
    axes: Vec<Vec<(f64, f64)>>,
    norm: f64,
}

impl PhaseTable {
    pub(crate) fn new(sides: &[f64], kmax: usize, x: &[f64]) -> Self {
        let axes = sides
            .iter()
            .zip(x)
            .map(|(l, xj)| {
                (0..=kmax)
                    .map(|k| {
                        let a = 2.0 * PI * k as f64 * xj / l;
                        (a.cos(), a.sin())
                    })
                    .collect()
            })
            .collect();
        let vol: f64 = sides.iter().product();
        Self {
            kmax,
            axes,
            norm: 1.0 / vol.sqrt(),
        }
    }

    pub(crate) fn eval(&self, k: &[i32], part: FourierPart) -> f64 {
        if part == FourierPart::Const {
            return self.norm;
        }
        let (mut re, mut im) = (1.0, 0.0);
        for (axis, ki) in self.axes.iter().zip(k) {
            let idx = ki.unsigned_abs() as usize;
            debug_assert!(idx <= self.kmax);
            let (c, s) = axis[idx];
            let s = if *ki < 0 { -s } else { s };
            let nr = re * c - im * s;
            im = re * s + im * c;
            re = nr;
        }
        let v = if part == FourierPart::Cos { re } else { im };
        std::f64::consts::SQRT_2 * self.norm * v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_lattice_counts() {
        // full ball in Z² of radius 2 has 13 points → 1 + 12/2
        assert_eq!(half_lattice_ball(2, 2).len(), 7);
        assert_eq!(half_lattice_ball(4, 1).len(), 5);
    }

    #[test]
    fn phase_table_matches_direct() {
        let sides = [1.5, 2.0];
        let x = [0.3, 1.7];
        let t = PhaseTable::new(&sides, 4, &x);
        let k = [2, -3];
        let p = phase(&sides, &k, &x);
        let v = (sides[0] * sides[1]).sqrt();
        assert!((t.eval(&k, FourierPart::Cos) - 2f64.sqrt() * p.cos() / v).abs() < 1e-14);
        assert!((t.eval(&k, FourierPart::Sin) - 2f64.sqrt() * p.sin() / v).abs() < 1e-14);
    }
}
