use std::io::Write;
use std::sync::Arc;

use super::rng::RngStream;
use crate::error::{LqgError, Result};
use crate::manifolds::Point;
use crate::spectral::{ConformalChange, GridBasis, ModeSet};

/// One draw of `h_ℓ = Σ_{j=1}^{ℓ} ψ_j ξ_j / √(a_n ν_j)`, stored by its
/// coefficients `c_j = ξ_j / √(a_n ν_j)` (index 0 is the constant mode and
/// always zero).
#[derive(Clone, Debug)]
pub struct FieldSample {
    modes: Arc<ModeSet>,
    coeffs: Vec<f64>,
    seed: u64,
    stream: u64,
}

impl FieldSample {
    /// Field with the given standard-normal coordinates `ξ_1..ξ_ℓ`.
    pub fn from_xi(modes: Arc<ModeSet>, xi: &[f64], seed: u64, stream: u64) -> Result<Self> {
        if xi.len() != modes.ell() {
            return Err(LqgError::InvalidParameter(format!(
                "expected {} noise coordinates, got {}",
                modes.ell(),
                xi.len()
            )));
        }
        let scales = modes.field_scales();
        let mut coeffs = vec![0.0; modes.len()];
        for j in 1..modes.len() {
            coeffs[j] = xi[j - 1] * scales[j];
        }
        Ok(Self {
            modes,
            coeffs,
            seed,
            stream,
        })
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    pub fn ell(&self) -> usize {
        self.modes.ell()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Same draw with `π_g φ` added (`φ` given by coefficients).
    pub fn shifted(&self, phi: &[f64]) -> Self {
        let mut s = self.clone();
        for (c, p) in s.coeffs.iter_mut().zip(phi).skip(1) {
            *c += p;
        }
        s
    }

    /// Truncation to the first `ell` modes.
    pub fn truncated(&self, ell: usize) -> Self {
        let modes = self.modes.truncate(ell);
        Self {
            coeffs: self.coeffs[..modes.len()].to_vec(),
            modes,
            seed: self.seed,
            stream: self.stream,
        }
    }

    pub fn eval(&self, x: &Point) -> f64 {
        let mut v = vec![0.0; self.modes.len()];
        self.modes.eval_at(x, &mut v);
        v.iter().zip(&self.coeffs).map(|(a, b)| a * b).sum()
    }

    /// Values on the grid of `basis` (which must share this sample's modes).
    pub fn on_grid(&self, basis: &GridBasis) -> Vec<f64> {
        basis.synthesize(&self.coeffs)
    }

    /// `⟨h, u⟩ = Σ_{j≥1} c_j u_j`.
    pub fn pair(&self, u: &[f64]) -> f64 {
        self.coeffs.iter().zip(u).skip(1).map(|(a, b)| a * b).sum()
    }

    /// `⟨h, f⟩` for a grid function by quadrature.
    pub fn pair_grid(&self, basis: &GridBasis, f: &[f64]) -> f64 {
        let h = self.on_grid(basis);
        let w = basis.grid().weights();
        (0..f.len()).map(|i| w[i] * h[i] * f[i]).sum()
    }

    /// CSV `c0.., h_value`.
    pub fn write_grid_csv<W: Write>(&self, basis: &GridBasis, w: W) -> Result<()> {
        let h = self.on_grid(basis);
        let mut out = csv::Writer::from_writer(w);
        let dim = self.modes.model().dimension();
        let mut header: Vec<String> = (0..dim).map(|i| format!("c{i}")).collect();
        header.push("h_value".into());
        out.write_record(&header)?;
        for (p, v) in basis.grid().points().iter().zip(&h) {
            let mut row: Vec<String> = p.coords.iter().map(|c| format!("{c:.17e}")).collect();
            row.push(format!("{v:.17e}"));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    /// CSV `mode_index, xi`.
    pub fn write_coeff_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["mode_index", "xi"])?;
        for (j, x) in white_noise_extract(self).iter().enumerate().skip(1) {
            out.write_record([j.to_string(), format!("{x:.17e}")])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Draw a field: `ξ_j` is the `j`-th normal of the stream.
pub fn sample_field(modes: &Arc<ModeSet>, rng: &mut RngStream) -> FieldSample {
    let xi = rng.normals(modes.ell());
    FieldSample::from_xi(modes.clone(), &xi, rng.seed(), rng.stream()).expect("length matches")
}

/// Field number `stream` of the master seed.
pub fn sample_field_at(modes: &Arc<ModeSet>, seed: u64, stream: u64) -> FieldSample {
    sample_field(modes, &mut RngStream::new(seed, stream))
}

/// `k_ℓ(x,y) = E[h_ℓ(x) h_ℓ(y)]`.
pub fn covariance_kernel_l(modes: &ModeSet, x: &Point, y: &Point) -> f64 {
    modes.normalized_kernel(x, y)
}

/// Coefficients of `√(a_n P_g) h`, i.e. the `ξ_j` (index 0 is zero).
pub fn white_noise_extract(sample: &FieldSample) -> Vec<f64> {
    let a_n = sample.modes.a_n();
    sample
        .coeffs
        .iter()
        .zip(sample.modes.nu())
        .map(|(c, n)| c * (a_n * n).sqrt())
        .collect()
}

/// `⟨h', u⟩ = ⟨h, e^{nφ} π_{g'} u⟩` for the transformed field, by quadrature.
pub fn conformal_field_pairing(change: &ConformalChange, h: &[f64], u: &[f64]) -> f64 {
    let mean = change.mean_prime(u);
    let w = change.basis().grid().weights();
    let d = change.density();
    (0..u.len()).map(|i| w[i] * h[i] * d[i] * (u[i] - mean)).sum()
}

/// `𝔨_{g'}(u, v) = ∬ u k_{g'} v dvol_{g'}²` by quadrature.
pub fn covariance_form_prime(change: &ConformalChange, u: &[f64], v: &[f64]) -> f64 {
    let kv = change.green_prime_apply(v);
    let prod: Vec<f64> = u.iter().zip(&kv).map(|(a, b)| a * b).collect();
    change.mean_prime(&prod) * change.volume_prime() / change.basis().modes().a_n()
}
