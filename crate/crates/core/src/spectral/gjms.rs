use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{LqgError, Result};
use crate::manifolds::{EigenspaceLabel, LaplaceSpectrum, ManifoldModel, Mode, Point, QuadratureGrid};
use crate::special::gamma_fn;

/// `a_n = 2 / (Γ(n/2) (4π)^{n/2})`.
pub fn a_n_constant(n: usize) -> f64 {
    2.0 / (gamma_fn(0.5 * n as f64) * (4.0 * std::f64::consts::PI).powf(0.5 * n as f64))
}

/// Shifts `ν_j^{(n)} = (n/2)(n/2 - 1) - j(j - 1)`, `j = 1..n/2`.
pub fn gjms_shifts(n: usize) -> Vec<i64> {
    let h = (n / 2) as i64;
    (1..=h).map(|j| h * (h - 1) - j * (j - 1)).collect()
}

/// `ν(λ) = ∏_j (λ + k/(n-1) ν_j^{(n)})`, which is `λ^{n/2}` on flat models.
pub fn gjms_of_lambda(n: usize, k: f64, lambda: f64) -> f64 {
    let c = if n > 1 { k / (n as f64 - 1.0) } else { 0.0 };
    gjms_shifts(n)
        .iter()
        .map(|s| lambda + c * *s as f64)
        .product()
}

/// Integer coefficients of `P` on a unit sphere as a polynomial in `Δ`,
/// constant term first: `S⁴ ↦ [0, -2, 1]`, i.e. `P = Δ² - 2Δ`.
pub fn gjms_sphere_polynomial(n: usize) -> Vec<i64> {
    // expand ∏ (x + ν_j) with x = -Δ, then substitute
    let mut poly = vec![1i64];
    for s in gjms_shifts(n) {
        let mut next = vec![0i64; poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i] += c * s;
            next[i + 1] += c;
        }
        poly = next;
    }
    poly.iter()
        .enumerate()
        .map(|(i, c)| if i % 2 == 0 { *c } else { -*c })
        .collect()
}

/// One GJMS eigenspace: `ν` together with the Laplace data it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct GjmsEntry {
    pub nu: f64,
    pub lambda: f64,
    pub multiplicity: usize,
    pub label: EigenspaceLabel,
    pub base_index: usize,
}

#[derive(Clone, Debug)]
pub struct GjmsSpectrum {
    base: LaplaceSpectrum,
    entries: Vec<GjmsEntry>,
    a_n: f64,
    einstein_constant: f64,
}

/// GJMS eigenvalues from a Laplace spectrum of an Einstein or flat model.
pub fn gjms_eigenvalues(spec: &LaplaceSpectrum) -> Result<GjmsSpectrum> {
    GjmsSpectrum::new(spec.clone())
}

impl GjmsSpectrum {
    pub fn new(base: LaplaceSpectrum) -> Result<Self> {
        let model = base.model();
        let n = model.dimension();
        let k = model.einstein_constant().ok_or_else(|| {
            LqgError::Unsupported(format!(
                "GJMS eigenvalues need an Einstein or flat metric; {model} is neither"
            ))
        })?;
        let mut entries: Vec<GjmsEntry> = base
            .entries()
            .iter()
            .enumerate()
            .map(|(i, e)| GjmsEntry {
                nu: if i == 0 { 0.0 } else { gjms_of_lambda(n, k, e.eigenvalue) },
                lambda: e.eigenvalue,
                multiplicity: e.multiplicity,
                label: e.label.clone(),
                base_index: i,
            })
            .collect();
        entries[1..].sort_by(|a, b| a.nu.total_cmp(&b.nu).then_with(|| a.label.cmp(&b.label)));
        Ok(Self {
            base,
            entries,
            a_n: a_n_constant(n),
            einstein_constant: k,
        })
    }

    /// Convenience: Laplace spectrum and GJMS spectrum in one step.
    pub fn of(model: &ManifoldModel, cutoff: usize) -> Result<Self> {
        Self::new(model.laplace_spectrum(cutoff)?)
    }

    pub fn base(&self) -> &LaplaceSpectrum {
        &self.base
    }

    pub fn model(&self) -> &ManifoldModel {
        self.base.model()
    }

    pub fn entries(&self) -> &[GjmsEntry] {
        &self.entries
    }

    pub fn a_n(&self) -> f64 {
        self.a_n
    }

    pub fn einstein_constant(&self) -> f64 {
        self.einstein_constant
    }

    /// `ν_j > 0` for every nonconstant eigenspace.
    pub fn is_admissible(&self) -> bool {
        self.entries[1..].iter().all(|e| e.nu > 0.0)
    }

    pub fn ensure_admissible(&self) -> Result<()> {
        if let Some(e) = self.entries[1..].iter().find(|e| e.nu <= 0.0) {
            return Err(LqgError::NotAdmissible(format!(
                "ν = {} ≤ 0 at eigenspace {}",
                e.nu, e.label
            )));
        }
        Ok(())
    }

    /// ν values repeated by multiplicity, `ν_0 = 0` first.
    pub fn nu_with_multiplicity(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.base.mode_count());
        for e in &self.entries {
            out.extend(std::iter::repeat(e.nu).take(e.multiplicity));
        }
        out
    }

    /// Smallest `ℓ ≥ at_least` at which the truncation ends on a full eigenspace.
    pub fn complete_ell(&self, at_least: usize) -> usize {
        let mut count = 0;
        for e in &self.entries {
            count += e.multiplicity;
            if count > at_least {
                return count - 1;
            }
        }
        count - 1
    }

    /// `ℓ` covering every eigenspace with `ν ≤ cap`.
    pub fn ell_below(&self, cap: f64) -> usize {
        self.entries
            .iter()
            .take_while(|e| e.nu <= cap)
            .map(|e| e.multiplicity)
            .sum::<usize>()
            .saturating_sub(1)
    }

    /// Expand the constant mode and the first `ell` nonconstant modes.
    pub fn mode_set(&self, ell: usize) -> Result<Arc<ModeSet>> {
        self.ensure_admissible()?;
        let mut modes = Vec::with_capacity(ell + 1);
        let mut lambda = Vec::with_capacity(ell + 1);
        let mut nu = Vec::with_capacity(ell + 1);
        'outer: for e in &self.entries {
            for m in self.base.entry_modes(e.base_index) {
                if modes.len() > ell {
                    break 'outer;
                }
                modes.push(m);
                lambda.push(e.lambda);
                nu.push(e.nu);
            }
        }
        if modes.len() <= ell {
            return Err(LqgError::InvalidParameter(format!(
                "ℓ = {ell} exceeds the {} nonconstant modes below cutoff {}",
                modes.len() - 1,
                self.base.cutoff()
            )));
        }
        Ok(Arc::new(ModeSet {
            model: self.model().clone(),
            modes,
            lambda,
            nu,
            a_n: self.a_n,
        }))
    }
}

/// The constant mode plus `ℓ` nonconstant eigenfunctions with their spectral data.
#[derive(Clone, Debug)]
pub struct ModeSet {
    model: ManifoldModel,
    modes: Vec<Mode>,
    lambda: Vec<f64>,
    nu: Vec<f64>,
    a_n: f64,
}

impl ModeSet {
    pub fn model(&self) -> &ManifoldModel {
        &self.model
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// Laplace eigenvalues, index 0 is the constant mode.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn a_n(&self) -> f64 {
        self.a_n
    }

    /// Number of nonconstant modes.
    pub fn ell(&self) -> usize {
        self.modes.len() - 1
    }

    /// Number of modes including the constant.
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Largest [`Mode::band`] present.
    pub fn band(&self) -> usize {
        self.modes.iter().map(Mode::band).max().unwrap_or(0)
    }

    /// All eigenfunction values at `x`.
    pub fn eval_at(&self, x: &Point, out: &mut [f64]) {
        self.model.eigenfunctions_at(&self.modes, x, out);
    }

    /// `Σ_{j≥1} ψ_j(x) ψ_j(y) / ν_j`.
    pub fn green_kernel(&self, x: &Point, y: &Point) -> f64 {
        let mut vx = vec![0.0; self.len()];
        let mut vy = vec![0.0; self.len()];
        self.eval_at(x, &mut vx);
        self.eval_at(y, &mut vy);
        (1..self.len()).map(|j| vx[j] * vy[j] / self.nu[j]).sum()
    }

    /// `k_ℓ = K_ℓ / a_n`.
    pub fn normalized_kernel(&self, x: &Point, y: &Point) -> f64 {
        self.green_kernel(x, y) / self.a_n
    }

    /// Field standard deviations `1/√(a_n ν_j)`, zero for the constant mode.
    pub fn field_scales(&self) -> Vec<f64> {
        self.nu
            .iter()
            .enumerate()
            .map(|(j, v)| if j == 0 { 0.0 } else { 1.0 / (self.a_n * v).sqrt() })
            .collect()
    }

    /// Restriction to the constant mode and the first `ell` modes.
    pub fn truncate(&self, ell: usize) -> Arc<ModeSet> {
        let k = (ell + 1).min(self.len());
        Arc::new(ModeSet {
            model: self.model.clone(),
            modes: self.modes[..k].to_vec(),
            lambda: self.lambda[..k].to_vec(),
            nu: self.nu[..k].to_vec(),
            a_n: self.a_n,
        })
    }

    /// Tabulate every mode on a grid.
    pub fn basis(self: &Arc<Self>, grid: Arc<QuadratureGrid>) -> GridBasis {
        GridBasis::new(self.clone(), grid)
    }
}

/// Mode values on a quadrature grid, stored row-major (point × mode).
#[derive(Clone, Debug)]
pub struct GridBasis {
    modes: Arc<ModeSet>,
    grid: Arc<QuadratureGrid>,
    values: Vec<f64>,
}

impl GridBasis {
    pub fn new(modes: Arc<ModeSet>, grid: Arc<QuadratureGrid>) -> Self {
        let m = modes.len();
        let mut values = vec![0.0; grid.len() * m];
        values
            .par_chunks_mut(m)
            .zip(grid.points().par_iter())
            .for_each(|(row, p)| modes.eval_at(p, row));
        Self {
            modes,
            grid,
            values,
        }
    }

    /// Basis from precomputed per-point values (for mollified fields).
    pub fn from_values(modes: Arc<ModeSet>, grid: Arc<QuadratureGrid>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len() * modes.len());
        Self {
            modes,
            grid,
            values,
        }
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    pub fn grid(&self) -> &Arc<QuadratureGrid> {
        &self.grid
    }

    pub fn n_points(&self) -> usize {
        self.grid.len()
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.n_modes();
        &self.values[i * m..(i + 1) * m]
    }

    /// Grid values of `Σ_j c_j ψ_j`. Shorter coefficient vectors are padded with zeros.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_points()];
        self.synthesize_into(coeffs, &mut out);
        out
    }

    pub fn synthesize_into(&self, coeffs: &[f64], out: &mut [f64]) {
        let k = coeffs.len().min(self.n_modes());
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.row(i);
            let mut s = 0.0;
            for j in 0..k {
                s += row[j] * coeffs[j];
            }
            *o = s;
        }
    }

    /// Quadrature inner products `Σ_i w_i f(x_i) ψ_j(x_i)`.
    pub fn analyze(&self, f: &[f64]) -> Vec<f64> {
        let m = self.n_modes();
        let mut out = vec![0.0; m];
        for (i, (w, v)) in self.grid.weights().iter().zip(f).enumerate() {
            let a = w * v;
            for (o, r) in out.iter_mut().zip(self.row(i)) {
                *o += a * r;
            }
        }
        out
    }

    /// `k_ℓ(x_i, x_i)` on every grid point.
    pub fn diagonal_covariance(&self) -> Vec<f64> {
        let scales = self.modes.field_scales();
        (0..self.n_points())
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(&scales)
                    .map(|(v, s)| (v * s) * (v * s))
                    .sum()
            })
            .collect()
    }

    /// Gram matrix `Σ_i w_i ψ_a ψ_b` with extra per-point weights.
    pub fn weighted_gram(&self, extra: &[f64]) -> Vec<f64> {
        let m = self.n_modes();
        let mut g = vec![0.0; m * m];
        for (i, (w, e)) in self.grid.weights().iter().zip(extra).enumerate() {
            let row = self.row(i);
            let we = w * e;
            for a in 0..m {
                let ra = we * row[a];
                for b in a..m {
                    g[a * m + b] += ra * row[b];
                }
            }
        }
        for a in 0..m {
            for b in 0..a {
                g[a * m + b] = g[b * m + a];
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn a_n_values() {
        assert!((a_n_constant(2) - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!((a_n_constant(4) - 1.0 / (8.0 * PI * PI)).abs() < 1e-15);
        assert!((a_n_constant(6) - 1.0 / (64.0 * PI.powi(3))).abs() < 1e-16);
    }

    #[test]
    fn sphere_polynomials() {
        assert_eq!(gjms_sphere_polynomial(2), vec![0, -1]);
        assert_eq!(gjms_sphere_polynomial(4), vec![0, -2, 1]);
        assert_eq!(gjms_sphere_polynomial(6), vec![0, -24, 10, -1]);
    }

    #[test]
    fn s4_first_eigenvalue() {
        let g = GjmsSpectrum::of(&ManifoldModel::unit_sphere(4).unwrap(), 3).unwrap();
        assert_eq!(g.entries()[0].nu, 0.0);
        assert!((g.entries()[1].nu - 24.0).abs() < 1e-12);
        // P = Δ² - 2Δ ⇒ λ² + 2λ
        for e in g.entries() {
            assert!((e.nu - (e.lambda * e.lambda + 2.0 * e.lambda)).abs() < 1e-9);
        }
    }

    #[test]
    fn flat_is_power_of_lambda() {
        let t = ManifoldModel::torus(vec![2.0 * PI; 4]).unwrap();
        let g = GjmsSpectrum::of(&t, 2).unwrap();
        assert!((g.entries()[1].nu - 1.0).abs() < 1e-14);
        for e in g.entries() {
            assert!((e.nu - e.lambda * e.lambda).abs() < 1e-9 * (1.0 + e.nu));
        }
    }

    #[test]
    fn complete_ell_lands_on_shells() {
        let g = GjmsSpectrum::of(&ManifoldModel::unit_sphere(2).unwrap(), 10).unwrap();
        assert_eq!(g.complete_ell(10), 15);
        assert_eq!(g.complete_ell(15), 15);
        assert_eq!(g.complete_ell(16), 24);
        assert_eq!(g.ell_below(12.0), 15);
    }
}
