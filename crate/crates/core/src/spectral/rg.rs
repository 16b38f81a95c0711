//! Estimator for `r_g(x) = lim_{y→x} [k_g(x,y) - log 1/d(x,y)]` and the
//! constant `c_g = ⟨r_g⟩_g + (a_n/4) 𝔭_g(r_g, r_g)`.

use serde::{Deserialize, Serialize};

use super::form::copoly_form_apply;
use super::gjms::{GjmsSpectrum, GridBasis};
use super::kernels::{KernelEvaluator, KernelKind};
use crate::error::Result;
use crate::manifolds::{ManifoldKind, ManifoldModel, Point};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RgOptions {
    /// First distance of the ladder.
    pub d0: f64,
    /// Number of halvings.
    pub steps: usize,
    /// Cutoff at distance `d` is about `resolution / d` (in the model's cutoff units).
    pub resolution: f64,
}

impl RgOptions {
    pub fn for_model(model: &ManifoldModel) -> Self {
        match model.kind() {
            ManifoldKind::Sphere { n: 2, .. } => Self {
                d0: 0.2,
                steps: 6,
                resolution: 100.0,
            },
            ManifoldKind::Sphere { .. } => Self {
                d0: 0.2,
                steps: 5,
                resolution: 100.0,
            },
            _ => Self {
                d0: 0.4,
                steps: 3,
                resolution: 12.0,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderStep {
    pub d: f64,
    pub cutoff: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RgEstimate {
    pub value: f64,
    pub error: f64,
    /// False when the last two extrapolants disagree by more than `1e-2`.
    pub converged: bool,
    pub ladder: Vec<LadderStep>,
}

/// Residuals `k_{g,ℓ(m)}(x, y_m) - log(1/d_m)` along `d_m = d₀ 2^{-m}`,
/// followed by Aitken's Δ² on the sequence.
pub fn r_g_estimate(model: &ManifoldModel, x: &Point, opts: &RgOptions) -> Result<RgEstimate> {
    let scale = match model.kind() {
        ManifoldKind::Sphere { radius, .. } => *radius,
        ManifoldKind::FlatTorus { sides, .. } => {
            sides.iter().cloned().fold(0.0, f64::max) / (2.0 * std::f64::consts::PI)
        }
        ManifoldKind::ProductSurfaces {
            curvature_1,
            curvature_2,
        } => 1.0 / curvature_1.min(*curvature_2).sqrt(),
    };
    let mut ladder = Vec::with_capacity(opts.steps + 1);
    for m in 0..=opts.steps {
        let d = opts.d0 / 2f64.powi(m as i32);
        let cutoff = (opts.resolution * scale / d).ceil() as usize;
        let spec = GjmsSpectrum::of(model, cutoff)?;
        let ev = KernelEvaluator::new(&spec, KernelKind::Normalized)?;
        let y = model.point_at_distance(x, d);
        let residual = ev.eval(x, &y) - (1.0 / d).ln();
        ladder.push(LadderStep {
            d,
            cutoff,
            residual,
        });
    }
    let r: Vec<f64> = ladder.iter().map(|s| s.residual).collect();
    let mut acc: Vec<f64> = Vec::new();
    for w in r.windows(3) {
        let den = w[2] - 2.0 * w[1] + w[0];
        acc.push(if den.abs() < 1e-14 {
            w[2]
        } else {
            w[2] - (w[2] - w[1]).powi(2) / den
        });
    }
    let (value, error) = match acc.len() {
        0 => (*r.last().unwrap(), f64::INFINITY),
        1 => (acc[0], (acc[0] - r[r.len() - 1]).abs()),
        k => (acc[k - 1], (acc[k - 1] - acc[k - 2]).abs()),
    };
    Ok(RgEstimate {
        value,
        error,
        converged: error < 1e-2,
        ladder,
    })
}

/// `⟨r⟩_g + (a_n/4) 𝔭(r, r)` for grid values of `r_g`.
pub fn c_g(basis: &GridBasis, r: &[f64]) -> f64 {
    let vol = basis.modes().model().volume();
    let mean = basis.grid().integrate(r) / vol;
    let c = basis.analyze(r);
    mean + 0.25 * basis.modes().a_n() * copoly_form_apply(basis.modes(), &c, &c)
}

/// `r_g` of the unit round 2-sphere, `log 2 - 1/2`.
pub fn r_g_unit_s2() -> f64 {
    std::f64::consts::LN_2 - 0.5
}
