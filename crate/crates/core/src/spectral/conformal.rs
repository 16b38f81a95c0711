//! Conformal change `g' = e^{2φ} g` for band-limited `φ`, with every integral
//! against `vol_{g'} = e^{nφ} vol_g` taken on the quadrature grid.

use std::sync::Arc;

use super::form::{copoly_apply, copoly_form_apply};
use super::gjms::GridBasis;
use crate::error::{LqgError, Result};
use crate::manifolds::Point;

#[derive(Clone, Debug)]
pub struct ConformalChange {
    basis: Arc<GridBasis>,
    phi_coeffs: Vec<f64>,
    phi: Vec<f64>,
    density: Vec<f64>,
    volume_prime: f64,
    /// `ρ_j = ∫ ψ_j dvol_{g'}`.
    rho: Vec<f64>,
    /// `Var ⟨h⟩_{g'} = Σ_{j≥1} ρ_j² / (a_n ν_j v'²)`.
    variance: f64,
    phi_bar_coeffs: Vec<f64>,
    phi_bar: Vec<f64>,
}

impl ConformalChange {
    /// `phi_coeffs` expand `φ` in the basis modes (shorter vectors are zero-padded).
    pub fn new(basis: Arc<GridBasis>, phi_coeffs: &[f64]) -> Result<Self> {
        let m = basis.n_modes();
        if phi_coeffs.len() > m {
            return Err(LqgError::InvalidParameter(format!(
                "φ has {} coefficients but the basis only {m} modes",
                phi_coeffs.len()
            )));
        }
        let mut pc = phi_coeffs.to_vec();
        pc.resize(m, 0.0);
        let n = basis.modes().model().dimension() as f64;
        let phi = basis.synthesize(&pc);
        let density: Vec<f64> = phi.iter().map(|p| (n * p).exp()).collect();
        let volume_prime = basis.grid().integrate(&density);
        let rho = basis.analyze(&density);
        let modes = basis.modes().clone();
        let a_n = modes.a_n();
        let nu = modes.nu();
        let mut variance = 0.0;
        for j in 1..m {
            variance += rho[j] * rho[j] / (a_n * nu[j]);
        }
        variance /= volume_prime * volume_prime;
        let vol = modes.model().volume();
        let mut phi_bar_coeffs = vec![0.0; m];
        phi_bar_coeffs[0] = -variance * vol.sqrt();
        for j in 1..m {
            phi_bar_coeffs[j] = 2.0 * rho[j] / (volume_prime * a_n * nu[j]);
        }
        let phi_bar = basis.synthesize(&phi_bar_coeffs);
        Ok(Self {
            basis,
            phi_coeffs: pc,
            phi,
            density,
            volume_prime,
            rho,
            variance,
            phi_bar_coeffs,
            phi_bar,
        })
    }

    pub fn basis(&self) -> &Arc<GridBasis> {
        &self.basis
    }

    pub fn phi_coeffs(&self) -> &[f64] {
        &self.phi_coeffs
    }

    /// `φ` on the grid.
    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// `e^{nφ}` on the grid.
    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn volume_prime(&self) -> f64 {
        self.volume_prime
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// `Var ⟨h⟩_{g'}`; also `⟨φ̄⟩_{g'}` and `-⟨φ̄⟩_g`.
    pub fn xi_variance(&self) -> f64 {
        self.variance
    }

    /// `φ̄` (normalized-kernel version) on the grid.
    pub fn phi_bar(&self) -> &[f64] {
        &self.phi_bar
    }

    pub fn phi_bar_coeffs(&self) -> &[f64] {
        &self.phi_bar_coeffs
    }

    fn eval_coeffs(&self, c: &[f64], x: &Point) -> f64 {
        let mut v = vec![0.0; self.basis.n_modes()];
        self.basis.modes().eval_at(x, &mut v);
        v.iter().zip(c).map(|(a, b)| a * b).sum()
    }

    pub fn phi_at(&self, x: &Point) -> f64 {
        self.eval_coeffs(&self.phi_coeffs, x)
    }

    pub fn phi_bar_at(&self, x: &Point) -> f64 {
        self.eval_coeffs(&self.phi_bar_coeffs, x)
    }

    /// `⟨h⟩_{g'}` for a field with coefficients `c` (index 0 ignored).
    pub fn xi(&self, c: &[f64]) -> f64 {
        c.iter().zip(&self.rho).skip(1).map(|(a, b)| a * b).sum::<f64>() / self.volume_prime
    }

    /// `⟨f⟩_{g'}` for a grid function.
    pub fn mean_prime(&self, f: &[f64]) -> f64 {
        let w = self.basis.grid().weights();
        let mut s = 0.0;
        for i in 0..f.len() {
            s += w[i] * self.density[i] * f[i];
        }
        s / self.volume_prime
    }

    /// `⟨φ⟩_g`, exact from the constant coefficient.
    pub fn phi_mean(&self) -> f64 {
        self.phi_coeffs[0] / self.basis.modes().model().volume().sqrt()
    }

    pub fn phi_mean_prime(&self) -> f64 {
        self.mean_prime(&self.phi)
    }

    /// `𝔭_g(φ, φ)`.
    pub fn phi_energy(&self) -> f64 {
        copoly_form_apply(self.basis.modes(), &self.phi_coeffs, &self.phi_coeffs)
    }

    /// `K_{g'}(x,y) = K_g(x,y) - ½ φ̄_K(x) - ½ φ̄_K(y)` with `φ̄_K = a_n φ̄`.
    pub fn green_kernel_prime(&self, x: &Point, y: &Point) -> f64 {
        let a_n = self.basis.modes().a_n();
        self.basis.modes().green_kernel(x, y) - 0.5 * a_n * (self.phi_bar_at(x) + self.phi_bar_at(y))
    }

    /// `k_{g'} = K_{g'} / a_n`.
    pub fn normalized_kernel_prime(&self, x: &Point, y: &Point) -> f64 {
        self.green_kernel_prime(x, y) / self.basis.modes().a_n()
    }

    /// `k_{g'}(x_i, x_j) = k_ℓ(x_i, x_j) - ½φ̄_i - ½φ̄_j` on the grid, row-major.
    pub fn covariance_matrix_prime(&self) -> Vec<f64> {
        let np = self.basis.n_points();
        let scales = self.basis.modes().field_scales();
        let scaled: Vec<Vec<f64>> = (0..np)
            .map(|i| self.basis.row(i).iter().zip(&scales).map(|(v, s)| v * s).collect())
            .collect();
        let mut c = vec![0.0; np * np];
        for i in 0..np {
            for j in i..np {
                let k: f64 = scaled[i].iter().zip(&scaled[j]).map(|(a, b)| a * b).sum();
                let v = k - 0.5 * (self.phi_bar[i] + self.phi_bar[j]);
                c[i * np + j] = v;
                c[j * np + i] = v;
            }
        }
        c
    }

    /// `(K_{g'} u)(x_i) = ∫ K_{g'}(x_i, y) u(y) dvol_{g'}(y)` for a grid function `u`.
    pub fn green_prime_apply(&self, u: &[f64]) -> Vec<f64> {
        let a_n = self.basis.modes().a_n();
        let nu = self.basis.modes().nu();
        let weighted: Vec<f64> = u.iter().zip(&self.density).map(|(a, b)| a * b).collect();
        let r = self.basis.analyze(&weighted);
        let mut c = vec![0.0; r.len()];
        for j in 1..r.len() {
            c[j] = r[j] / nu[j];
        }
        let mass = self.basis.grid().integrate(&weighted);
        let pb: Vec<f64> = self.phi_bar.iter().zip(&weighted).map(|(a, b)| a * b).collect();
        let pb_mass = a_n * self.basis.grid().integrate(&pb);
        self.basis
            .synthesize(&c)
            .iter()
            .zip(&self.phi_bar)
            .map(|(k, p)| k - 0.5 * a_n * p * mass - 0.5 * pb_mass)
            .collect()
    }

    /// `sup_i |K_{g'} P_{g'} u - π_{g'} u|` for band-limited `u`, `P_{g'} = e^{-nφ} P_g`.
    pub fn inversion_residual(&self, u_coeffs: &[f64]) -> f64 {
        let mut u = u_coeffs.to_vec();
        u.resize(self.basis.n_modes(), 0.0);
        let pu = self.basis.synthesize(&copoly_apply(self.basis.modes(), &u));
        let p_prime_u: Vec<f64> = pu.iter().zip(&self.density).map(|(a, d)| a / d).collect();
        let lhs = self.green_prime_apply(&p_prime_u);
        let ug = self.basis.synthesize(&u);
        let mean = self.mean_prime(&ug);
        lhs.iter()
            .zip(&ug)
            .map(|(l, v)| (l - (v - mean)).abs())
            .fold(0.0, f64::max)
    }

    /// `sup_i |∫ K_{g'}(x_i, ·) dvol_{g'}|`.
    pub fn grounding_residual(&self) -> f64 {
        let ones = vec![1.0; self.basis.n_points()];
        self.green_prime_apply(&ones)
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::ManifoldModel;
    use crate::spectral::GjmsSpectrum;

    fn setup(amp: f64) -> ConformalChange {
        let model = ManifoldModel::unit_sphere(2).unwrap();
        let g = GjmsSpectrum::of(&model, 8).unwrap();
        let modes = g.mode_set(35).unwrap();
        let grid = Arc::new(model.quadrature(24).unwrap());
        let basis = Arc::new(modes.basis(grid));
        let phi: Vec<f64> = (0..9).map(|j| amp * ((j as f64) * 1.3).cos()).collect();
        ConformalChange::new(basis, &phi).unwrap()
    }

    #[test]
    fn identity_change() {
        let c = setup(0.0);
        assert!(c.phi_bar().iter().all(|v| v.abs() < 1e-14));
        let x = Point::from([0.3, 0.2]);
        let y = Point::from([2.0, 4.0]);
        let k = c.basis().modes().green_kernel(&x, &y);
        assert!((c.green_kernel_prime(&x, &y) - k).abs() < 1e-14);
    }

    #[test]
    fn phi_bar_means() {
        let c = setup(0.2);
        let v = c.xi_variance();
        assert!((c.mean_prime(c.phi_bar()) - v).abs() < 1e-12);
        let g_mean = c.basis().grid().integrate(c.phi_bar()) / (4.0 * std::f64::consts::PI);
        assert!((g_mean + v).abs() < 1e-12);
    }

    #[test]
    fn inversion_and_grounding() {
        let c = setup(0.2);
        assert!(c.grounding_residual() < 1e-10);
        let u: Vec<f64> = (0..36).map(|j| 0.3 * ((j as f64) * 0.5).sin()).collect();
        assert!(c.inversion_residual(&u) < 1e-10);
    }
}
