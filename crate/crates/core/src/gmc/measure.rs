use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cgf::{mollified_basis, FieldSample, Mollifier};
use crate::error::{LqgError, Result};
use crate::manifolds::QuadratureGrid;
use crate::spectral::{c_g, copoly_apply, r_g_estimate, GridBasis, ModeSet, RgOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Plain,
    Refined,
    Adjusted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scheme {
    Eigenfunction,
    Mollified(Mollifier),
}

/// `|γ| < √(2n)`.
pub fn check_subcritical(gamma: f64, n: usize) -> Result<()> {
    let bound = (2.0 * n as f64).sqrt();
    if gamma.is_finite() && gamma.abs() < bound {
        Ok(())
    } else {
        Err(LqgError::Supercritical {
            gamma: gamma.abs(),
            bound,
        })
    }
}

/// Everything about an LQG measure that does not depend on the field draw.
#[derive(Clone, Debug)]
pub struct LqgBuilder {
    basis: Arc<GridBasis>,
    gamma: f64,
    flavor: Flavor,
    scheme: Scheme,
    /// `(γ²/2) k_ℓ(x_i, x_i)`.
    half_var: Vec<f64>,
    /// Per-point log flavor factor.
    flavor_log: Vec<f64>,
    /// Coefficients of `P_g r_g` for the refined per-sample factor.
    p_rg: Option<Vec<f64>>,
    r_g: Option<Vec<f64>>,
}

impl LqgBuilder {
    pub fn new(modes: &Arc<ModeSet>, grid: Arc<QuadratureGrid>, gamma: f64, flavor: Flavor, scheme: Scheme) -> Result<Self> {
        let basis = match scheme {
            Scheme::Eigenfunction => modes.basis(grid),
            Scheme::Mollified(q) => mollified_basis(modes, grid, &q)?,
        };
        Self::from_basis(Arc::new(basis), gamma, flavor, scheme)
    }

    pub fn from_basis(basis: Arc<GridBasis>, gamma: f64, flavor: Flavor, scheme: Scheme) -> Result<Self> {
        let model = basis.modes().model().clone();
        check_subcritical(gamma, model.dimension())?;
        let half_var: Vec<f64> = basis
            .diagonal_covariance()
            .iter()
            .map(|k| 0.5 * gamma * gamma * k)
            .collect();
        let mut b = Self {
            basis,
            gamma,
            flavor,
            scheme,
            half_var,
            flavor_log: Vec::new(),
            p_rg: None,
            r_g: None,
        };
        if flavor != Flavor::Plain {
            // every implemented model is homogeneous, so one point suffices
            let est = r_g_estimate(&model, &model.base_point(), &RgOptions::for_model(&model))?;
            let np = b.basis.n_points();
            b = b.with_r_g(vec![est.value; np]);
        } else {
            b.flavor_log = vec![0.0; b.basis.n_points()];
        }
        Ok(b)
    }

    /// Override the `r_g` grid values used by the refined and adjusted flavors.
    pub fn with_r_g(mut self, r: Vec<f64>) -> Self {
        let g2 = 0.5 * self.gamma * self.gamma;
        self.flavor_log = match self.flavor {
            Flavor::Plain => vec![0.0; r.len()],
            Flavor::Adjusted => r.iter().map(|v| g2 * v).collect(),
            Flavor::Refined => {
                let c = c_g(&self.basis, &r);
                r.iter().map(|v| g2 * (v - c)).collect()
            }
        };
        if self.flavor == Flavor::Refined {
            let rc = self.basis.analyze(&r);
            self.p_rg = Some(copoly_apply(self.basis.modes(), &rc));
        }
        self.r_g = Some(r);
        self
    }

    pub fn basis(&self) -> &Arc<GridBasis> {
        &self.basis
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn r_g(&self) -> Option<&[f64]> {
        self.r_g.as_deref()
    }

    pub fn n_points(&self) -> usize {
        self.basis.n_points()
    }

    /// Per-point measure weights for field coefficients `c` (index 0 ignored).
    pub fn weights_into(&self, c: &[f64], out: &mut [f64]) {
        let w = self.basis.grid().weights();
        let mut extra = 0.0;
        if let Some(pr) = &self.p_rg {
            let pair: f64 = c.iter().zip(pr).skip(1).map(|(a, b)| a * b).sum();
            extra = -0.5 * self.gamma * self.basis.modes().a_n() * pair;
        }
        let m = self.basis.n_modes().min(c.len());
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.basis.row(i);
            let mut h = 0.0;
            for j in 1..m {
                h += row[j] * c[j];
            }
            *o = w[i] * (self.gamma * h - self.half_var[i] + self.flavor_log[i] + extra).exp();
        }
    }

    pub fn weights(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_points()];
        self.weights_into(c, &mut out);
        out
    }

    /// Construct the measure of one field sample.
    pub fn build(&self, sample: &FieldSample) -> LqgMeasure {
        LqgMeasure {
            flavor: self.flavor,
            gamma: self.gamma,
            ell: sample.ell(),
            scheme: self.scheme,
            seed: sample.seed(),
            stream: sample.stream(),
            weights: self.weights(sample.coefficients()),
        }
    }
}

/// `build_lqg` in one call.
pub fn build_lqg(sample: &FieldSample, gamma: f64, grid: Arc<QuadratureGrid>, flavor: Flavor, scheme: Scheme) -> Result<LqgMeasure> {
    Ok(LqgBuilder::new(sample.modes(), grid, gamma, flavor, scheme)?.build(sample))
}

/// A discrete LQG measure on the quadrature grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LqgMeasure {
    pub flavor: Flavor,
    pub gamma: f64,
    pub ell: usize,
    pub scheme: Scheme,
    pub seed: u64,
    pub stream: u64,
    pub weights: Vec<f64>,
}

impl LqgMeasure {
    pub fn total_mass(&self) -> f64 {
        crate::stats::pairwise_sum(&self.weights)
    }

    pub fn mass_of(&self, indices: &[usize]) -> f64 {
        indices.iter().map(|i| self.weights[*i]).sum()
    }

    /// CSV `c0.., weight`.
    pub fn write_csv<W: Write>(&self, grid: &QuadratureGrid, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let dim = grid.points().first().map_or(0, |p| p.coords.len());
        let mut header: Vec<String> = (0..dim).map(|i| format!("c{i}")).collect();
        header.push("weight".into());
        out.write_record(&header)?;
        for (p, v) in grid.points().iter().zip(&self.weights) {
            let mut row: Vec<String> = p.coords.iter().map(|c| format!("{c:.17e}")).collect();
            row.push(format!("{v:.17e}"));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `max_i |μ^{h+φ}_i / (e^{γφ_i} μ^h_i) - 1|` for `φ` in the mode span.
pub fn cameron_martin_shift_check(builder: &LqgBuilder, sample: &FieldSample, phi: &[f64]) -> f64 {
    let base = builder.build(sample);
    let shifted = builder.build(&sample.shifted(phi));
    let mut grounded = phi.to_vec();
    grounded[0] = 0.0;
    let phi_grid = builder.basis().synthesize(&grounded);
    base.weights
        .iter()
        .zip(&shifted.weights)
        .zip(&phi_grid)
        .map(|((b, s), p)| (s / (b * (builder.gamma() * p).exp()) - 1.0).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgf::sample_field_at;
    use crate::manifolds::ManifoldModel;
    use crate::spectral::GjmsSpectrum;

    fn setup() -> (Arc<ModeSet>, Arc<QuadratureGrid>) {
        let model = ManifoldModel::unit_sphere(2).unwrap();
        let m = GjmsSpectrum::of(&model, 6).unwrap().mode_set(24).unwrap();
        (m, Arc::new(model.quadrature(10).unwrap()))
    }

    #[test]
    fn gamma_zero_gives_volume_weights() {
        let (m, grid) = setup();
        let s = sample_field_at(&m, 1, 0);
        let mu = build_lqg(&s, 0.0, grid.clone(), Flavor::Plain, Scheme::Eigenfunction).unwrap();
        assert_eq!(mu.weights, grid.weights());
    }

    #[test]
    fn supercritical_rejected() {
        let (m, grid) = setup();
        let s = sample_field_at(&m, 1, 0);
        let e = build_lqg(&s, 2.0, grid, Flavor::Plain, Scheme::Eigenfunction).unwrap_err();
        assert!(e.to_string().contains("subcritical range"));
    }

    #[test]
    fn cameron_martin_is_exact() {
        let (m, grid) = setup();
        let b = LqgBuilder::new(&m, grid, 1.2, Flavor::Plain, Scheme::Eigenfunction).unwrap();
        let s = sample_field_at(&m, 4, 9);
        let phi: Vec<f64> = (0..m.len()).map(|j| 0.2 * (j as f64 * 2.1).sin()).collect();
        assert!(cameron_martin_shift_check(&b, &s, &phi) < 1e-12);
    }

    #[test]
    fn flavors_differ_by_constant_factor_on_s2() {
        let (m, grid) = setup();
        let s = sample_field_at(&m, 2, 2);
        let p = LqgBuilder::new(&m, grid.clone(), 1.0, Flavor::Plain, Scheme::Eigenfunction).unwrap();
        let a = LqgBuilder::new(&m, grid.clone(), 1.0, Flavor::Adjusted, Scheme::Eigenfunction).unwrap();
        let r = LqgBuilder::new(&m, grid, 1.0, Flavor::Refined, Scheme::Eigenfunction).unwrap();
        let (wp, wa, wr) = (p.build(&s).weights, a.build(&s).weights, r.build(&s).weights);
        let ratio = wa[0] / wp[0];
        let rg = a.r_g().unwrap()[0];
        assert!((ratio - (0.5 * rg).exp()).abs() < 1e-12);
        for i in 0..wp.len() {
            assert!((wa[i] / wp[i] - ratio).abs() < 1e-12);
            // r_g constant ⇒ c_g = r_g and the refined measure equals the plain one
            assert!((wr[i] / wp[i] - 1.0).abs() < 1e-9);
        }
    }
}
