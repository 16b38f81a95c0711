use std::io::Write;

use serde::{Deserialize, Serialize};

use super::gjms::{a_n_constant, gjms_of_lambda, GjmsSpectrum};
use crate::error::{LqgError, Result};
use crate::manifolds::{LaplaceSpectrum, ManifoldKind, ManifoldModel, Point};
use crate::special::{gamma_fn, gauss_legendre_interval};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelKind {
    /// `K_g = Σ_{j≥1} ψ_j ψ_j / ν_j`.
    CopolyGreen,
    /// `k_g = K_g / a_n`.
    Normalized,
    Resolvent { s: f64, alpha: f64 },
    GroundedResolvent { s: f64, alpha: f64 },
    Heat { t: f64 },
    GroundedHeat { t: f64 },
}

impl KernelKind {
    fn grounded(&self) -> bool {
        !matches!(self, KernelKind::Resolvent { .. } | KernelKind::Heat { .. })
    }

    fn needs_gjms(&self) -> bool {
        matches!(self, KernelKind::CopolyGreen | KernelKind::Normalized)
    }
}

/// Degree-wise (eigenspace-wise) evaluation of spectral kernels through the
/// addition theorem; cost is linear in the number of eigenspaces.
#[derive(Clone, Debug)]
pub struct KernelEvaluator {
    spectrum: LaplaceSpectrum,
    kind: KernelKind,
    coeffs: Vec<f64>,
}

impl KernelEvaluator {
    /// Any kernel kind on a GJMS spectrum.
    pub fn new(spec: &GjmsSpectrum, kind: KernelKind) -> Result<Self> {
        if kind.needs_gjms() {
            spec.ensure_admissible()?;
        }
        Self::build(spec.base().clone(), kind, Some(spec.einstein_constant()))
    }

    /// Resolvent and heat kernels, which need only the Laplace spectrum.
    pub fn laplace(spec: &LaplaceSpectrum, kind: KernelKind) -> Result<Self> {
        if kind.needs_gjms() {
            let g = GjmsSpectrum::new(spec.clone())?;
            return Self::new(&g, kind);
        }
        Self::build(spec.clone(), kind, None)
    }

    fn build(spectrum: LaplaceSpectrum, kind: KernelKind, k: Option<f64>) -> Result<Self> {
        let n = spectrum.model().dimension();
        let lambda_1 = spectrum.lambda_1();
        match kind {
            KernelKind::Resolvent { s, alpha } => {
                check_s(s)?;
                if !(alpha > 0.0) {
                    return Err(LqgError::Domain(format!(
                        "ungrounded resolvent needs α > 0 (got {alpha})"
                    )));
                }
            }
            KernelKind::GroundedResolvent { s, alpha } => {
                check_s(s)?;
                if !(alpha > -lambda_1) {
                    return Err(LqgError::Domain(format!(
                        "grounded resolvent needs α > -λ₁ = {} (got {alpha})",
                        -lambda_1
                    )));
                }
            }
            KernelKind::Heat { t } | KernelKind::GroundedHeat { t } => {
                if !(t > 0.0) {
                    return Err(LqgError::Domain(format!("heat kernel needs t > 0 (got {t})")));
                }
            }
            _ => {}
        }
        let a_n = a_n_constant(n);
        let coeffs = spectrum
            .entries()
            .iter()
            .enumerate()
            .map(|(i, e)| {
                if i == 0 && kind.grounded() {
                    return 0.0;
                }
                let lam = e.eigenvalue;
                match kind {
                    KernelKind::CopolyGreen => 1.0 / gjms_of_lambda(n, k.unwrap(), lam),
                    KernelKind::Normalized => 1.0 / (a_n * gjms_of_lambda(n, k.unwrap(), lam)),
                    KernelKind::Resolvent { s, alpha } | KernelKind::GroundedResolvent { s, alpha } => {
                        (alpha + lam).powf(-s)
                    }
                    KernelKind::Heat { t } | KernelKind::GroundedHeat { t } => (-lam * t).exp(),
                }
            })
            .collect();
        Ok(Self {
            spectrum,
            kind,
            coeffs,
        })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn spectrum(&self) -> &LaplaceSpectrum {
        &self.spectrum
    }

    pub fn model(&self) -> &ManifoldModel {
        self.spectrum.model()
    }

    pub fn cutoff(&self) -> usize {
        self.spectrum.cutoff()
    }

    pub fn eval(&self, x: &Point, y: &Point) -> f64 {
        let z = self.spectrum.zonal_sums(x, y);
        dot(&self.coeffs, &z)
    }

    /// Kernel value at geodesic distance `d` from the model's base point.
    pub fn eval_at_distance(&self, d: f64) -> f64 {
        if let ManifoldKind::Sphere { radius, .. } = self.model().kind() {
            return dot(&self.coeffs, &self.spectrum.sphere_zonal(d / radius));
        }
        let x = self.model().base_point();
        let y = self.model().point_at_distance(&x, d);
        self.eval(&x, &y)
    }

    /// Per-eigenspace contributions at distance `d`.
    pub fn terms_at_distance(&self, d: f64) -> Vec<f64> {
        let z = if let ManifoldKind::Sphere { radius, .. } = self.model().kind() {
            self.spectrum.sphere_zonal(d / radius)
        } else {
            let x = self.model().base_point();
            let y = self.model().point_at_distance(&x, d);
            self.spectrum.zonal_sums(&x, &y)
        };
        self.coeffs.iter().zip(&z).map(|(c, v)| c * v).collect()
    }
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 {
        Ok(())
    } else {
        Err(LqgError::Domain(format!("resolvent order s must be positive (got {s})")))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mode-wise partial sum `K_{g,ℓ}(x,y) = Σ_{j=1}^{ℓ} ψ_j(x) ψ_j(y) / ν_j`.
pub fn green_kernel_eval(spec: &GjmsSpectrum, x: &Point, y: &Point, ell: usize) -> Result<f64> {
    Ok(spec.mode_set(ell)?.green_kernel(x, y))
}

/// `k_{g,ℓ} = K_{g,ℓ} / a_n`.
pub fn normalized_kernel_eval(spec: &GjmsSpectrum, x: &Point, y: &Point, ell: usize) -> Result<f64> {
    Ok(spec.mode_set(ell)?.normalized_kernel(x, y))
}

/// `Σ χ_j(x) χ_j(y) / (α + λ_j)^s` over the spectrum, `j ≥ 1` when grounded.
pub fn resolvent_kernel_eval(
    spec: &LaplaceSpectrum,
    s: f64,
    alpha: f64,
    grounded: bool,
    x: &Point,
    y: &Point,
) -> Result<f64> {
    let kind = if grounded {
        KernelKind::GroundedResolvent { s, alpha }
    } else {
        KernelKind::Resolvent { s, alpha }
    };
    Ok(KernelEvaluator::laplace(spec, kind)?.eval(x, y))
}

pub fn heat_kernel_eval(spec: &LaplaceSpectrum, t: f64, x: &Point, y: &Point) -> Result<f64> {
    Ok(KernelEvaluator::laplace(spec, KernelKind::Heat { t })?.eval(x, y))
}

/// Resolvent through its heat representation
/// `(1/Γ(s)) ∫_0^∞ e^{-αt} t^{s-1} p_t(x,y) dt`, integrated in `u = log t`
/// with composite 20-point Gauss–Legendre panels of width 1/2.
pub fn resolvent_via_heat(
    spec: &LaplaceSpectrum,
    s: f64,
    alpha: f64,
    grounded: bool,
    x: &Point,
    y: &Point,
) -> Result<f64> {
    // validates the (s, α) domain
    let kind = if grounded {
        KernelKind::GroundedResolvent { s, alpha }
    } else {
        KernelKind::Resolvent { s, alpha }
    };
    KernelEvaluator::laplace(spec, kind)?;
    let z = spec.zonal_sums(x, y);
    let start = usize::from(grounded);
    let lam: Vec<f64> = spec.entries()[start..].iter().map(|e| e.eigenvalue + alpha).collect();
    let z = &z[start..];
    let abs_sum: f64 = z.iter().map(|v| v.abs()).sum::<f64>().max(1e-300);
    let rate_min = lam.iter().cloned().fold(f64::INFINITY, f64::min);
    // below u_lo every exponential is ≈ 1 and the integrand is ≤ e^{su}Σ|z|
    let u_lo = ((1e-17f64).ln() - abs_sum.ln()) / s;
    let mut t_hi = 1.0 / rate_min;
    for _ in 0..50 {
        t_hi = (40.0 + abs_sum.ln() + (s - 1.0).max(0.0) * t_hi.ln()) / rate_min;
    }
    let u_hi = t_hi.max(1e-300).ln() + 1.0;
    let (nodes, weights) = gauss_legendre_interval(20, 0.0, 0.5);
    let panels = ((u_hi - u_lo) / 0.5).ceil() as usize;
    let mut total = 0.0;
    for p in 0..panels {
        let a = u_lo + 0.5 * p as f64;
        let mut panel = 0.0;
        for (node, w) in nodes.iter().zip(&weights) {
            let u = a + node;
            let t = u.exp();
            let mut pt = 0.0;
            for (l, zv) in lam.iter().zip(z) {
                pt += zv * (-l * t).exp();
            }
            panel += w * (s * u).exp() * pt;
        }
        total += panel;
    }
    Ok(total / gamma_fn(s))
}

/// Right side of the heat-kernel lower bound for `Ric ≥ -(n-1)a² g`:
/// `(4πt)^{-n/2} (ad / sinh ad)^{(n-1)/2} e^{-d²/4t} e^{-λ_* t}` with
/// `λ_* = (n-1)² a²/4` (`a²/6` when `n = 2`).
pub fn heat_lower_bound(n: usize, a: f64, t: f64, d: f64) -> f64 {
    let nf = n as f64;
    let ad = a * d;
    let shape = if ad == 0.0 { 1.0 } else { ad / ad.sinh() };
    let lambda_star = if n == 2 {
        a * a / 6.0
    } else {
        (nf - 1.0).powi(2) * a * a / 4.0
    };
    (4.0 * std::f64::consts::PI * t).powf(-0.5 * nf)
        * shape.powf(0.5 * (nf - 1.0))
        * (-d * d / (4.0 * t)).exp()
        * (-lambda_star * t).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatBoundCheck {
    pub t: f64,
    pub d: f64,
    pub kernel: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Evaluate `p_t` at distance `d` with a tail below `tol` and compare with
/// [`heat_lower_bound`].
pub fn lower_bound_check(model: &ManifoldModel, a: f64, t: f64, d: f64, tol: f64) -> Result<HeatBoundCheck> {
    let cutoff = heat_cutoff(model, t, tol)?;
    let spec = model.laplace_spectrum(cutoff)?;
    let ev = KernelEvaluator::laplace(&spec, KernelKind::Heat { t })?;
    let kernel = ev.eval_at_distance(d);
    let bound = heat_lower_bound(model.dimension(), a, t, d);
    Ok(HeatBoundCheck {
        t,
        d,
        kernel,
        bound,
        holds: kernel >= bound,
    })
}

/// Smallest cutoff whose neglected heat-kernel terms sum (in absolute value,
/// at the diagonal) to less than `tol`.
pub fn heat_cutoff(model: &ManifoldModel, t: f64, tol: f64) -> Result<usize> {
    if !(t > 0.0) {
        return Err(LqgError::Domain(format!("heat kernel needs t > 0 (got {t})")));
    }
    let mut cutoff = 4;
    loop {
        // tail beyond `cutoff` estimated from the spectrum at twice the cutoff
        let spec = model.laplace_spectrum(2 * cutoff)?;
        let vol = model.volume();
        let lam_cut = model.laplace_spectrum(cutoff)?.entries().last().unwrap().eigenvalue;
        let tail: f64 = spec
            .entries()
            .iter()
            .filter(|e| e.eigenvalue > lam_cut)
            .map(|e| e.multiplicity as f64 / vol * (-e.eigenvalue * t).exp())
            .sum();
        let beyond = spec.entries().last().unwrap();
        let next = beyond.multiplicity as f64 / vol * (-beyond.eigenvalue * t).exp();
        if tail < tol && next < tol * 1e-3 {
            return Ok(cutoff);
        }
        cutoff *= 2;
        if cutoff > 1 << 16 {
            return Err(LqgError::Numerical(format!(
                "heat kernel at t = {t} needs a cutoff beyond {}",
                1 << 16
            )));
        }
    }
}

/// Result of the default truncation rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationChoice {
    pub cutoff: usize,
    pub converged: bool,
}

/// Default kernel cutoff: the first cutoff at which every term in a trailing
/// window of eigenspaces contributes less than `1e-6` of the partial sum at
/// distance `0.05`. Spheres scan degree by degree; other models double the
/// cutoff and stop at a size cap, reporting `converged = false` if the rule
/// was not met.
pub fn default_kernel_cutoff(spec: &GjmsSpectrum, kind: KernelKind) -> Result<TruncationChoice> {
    const D: f64 = 0.05;
    const REL: f64 = 1e-6;
    const WINDOW: usize = 32;
    let model = spec.model().clone();
    if let ManifoldKind::Sphere { .. } = model.kind() {
        let max = 1usize << 17;
        let big = GjmsSpectrum::of(&model, max)?;
        let terms = KernelEvaluator::new(&big, kind)?.terms_at_distance(D);
        let mut partial = 0.0;
        let mut window_max = Vec::with_capacity(terms.len());
        for (l, t) in terms.iter().enumerate() {
            partial += t;
            window_max.push(t.abs());
            if l >= WINDOW {
                let m = window_max[l + 1 - WINDOW..=l].iter().cloned().fold(0.0, f64::max);
                if m < REL * partial.abs() {
                    return Ok(TruncationChoice {
                        cutoff: l,
                        converged: true,
                    });
                }
            }
        }
        return Ok(TruncationChoice {
            cutoff: max,
            converged: false,
        });
    }
    let mut cutoff = 8;
    let mut last = cutoff;
    while cutoff <= 1024 {
        let s = GjmsSpectrum::of(&model, cutoff)?;
        if s.base().entries().len() > 2_000_000 {
            break;
        }
        let terms = KernelEvaluator::new(&s, kind)?.terms_at_distance(D);
        let partial: f64 = terms.iter().sum();
        let keep = (terms.len() * 3) / 4;
        let tail_max = terms[keep..].iter().map(|v| v.abs()).fold(0.0, f64::max);
        last = cutoff;
        if tail_max < REL * partial.abs() {
            return Ok(TruncationChoice {
                cutoff,
                converged: true,
            });
        }
        cutoff *= 2;
    }
    Ok(TruncationChoice {
        cutoff: last,
        converged: false,
    })
}

/// One row of a kernel ladder: distance, value and residual against `c·log(1/d)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub d: f64,
    pub kernel_value: f64,
    pub residual_vs_log: f64,
}

pub fn kernel_ladder(ev: &KernelEvaluator, distances: &[f64], log_coefficient: f64) -> Vec<KernelRow> {
    distances
        .iter()
        .map(|&d| {
            let v = ev.eval_at_distance(d);
            KernelRow {
                d,
                kernel_value: v,
                residual_vs_log: v - log_coefficient * (1.0 / d).ln(),
            }
        })
        .collect()
}

/// Evenly spaced distances in `[lo, hi]`.
pub fn distance_ladder(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

/// `sup |residual|` over a ladder.
pub fn residual_sup(rows: &[KernelRow]) -> f64 {
    rows.iter().map(|r| r.residual_vs_log.abs()).fold(0.0, f64::max)
}

pub fn write_ladder_csv<W: Write>(rows: &[KernelRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["d", "kernel_value", "residual_vs_log"])?;
    for r in rows {
        out.write_record([
            format!("{:.17e}", r.d),
            format!("{:.17e}", r.kernel_value),
            format!("{:.17e}", r.residual_vs_log),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn s2() -> ManifoldModel {
        ManifoldModel::unit_sphere(2).unwrap()
    }

    #[test]
    fn degreewise_matches_modewise() {
        let model = s2();
        let g = GjmsSpectrum::of(&model, 6).unwrap();
        let ev = KernelEvaluator::new(&g, KernelKind::CopolyGreen).unwrap();
        let x = Point::from([0.4, 1.0]);
        let y = Point::from([2.0, 5.0]);
        let ell = g.complete_ell(48);
        let a = ev.eval(&x, &y);
        let b = green_kernel_eval(&g, &x, &y, ell).unwrap();
        assert!((a - b).abs() < 1e-13, "{a} vs {b}");
    }

    #[test]
    fn grounded_minus_ungrounded_is_constant_mode() {
        let model = s2();
        let spec = model.laplace_spectrum(30).unwrap();
        let x = model.base_point();
        let y = model.point_at_distance(&x, 1.0);
        let g = resolvent_kernel_eval(&spec, 1.0, 0.5, false, &x, &y).unwrap();
        let gg = resolvent_kernel_eval(&spec, 1.0, 0.5, true, &x, &y).unwrap();
        assert!((g - gg - 1.0 / (0.5 * 4.0 * PI)).abs() < 1e-13);
    }

    #[test]
    fn resolvent_domain_errors() {
        let spec = s2().laplace_spectrum(5).unwrap();
        let x = s2().base_point();
        assert!(resolvent_kernel_eval(&spec, 1.0, 0.0, false, &x, &x).is_err());
        assert!(resolvent_kernel_eval(&spec, 1.0, -1.0, true, &x, &x).is_ok());
        assert!(resolvent_kernel_eval(&spec, 1.0, -2.5, true, &x, &x).is_err());
    }

    #[test]
    fn heat_route_matches_spectral_sum() {
        let model = s2();
        let spec = model.laplace_spectrum(300).unwrap();
        let x = model.base_point();
        let y = model.point_at_distance(&x, 0.8);
        for (s, a, g) in [(1.0, 1.0, false), (2.0, 0.5, true), (1.5, 0.3, false)] {
            let direct = resolvent_kernel_eval(&spec, s, a, g, &x, &y).unwrap();
            let heat = resolvent_via_heat(&spec, s, a, g, &x, &y).unwrap();
            assert!((direct - heat).abs() < 1e-10, "s={s}: {direct} vs {heat}");
        }
    }

    #[test]
    fn heat_kernel_tends_to_inverse_volume() {
        let model = s2();
        let spec = model.laplace_spectrum(20).unwrap();
        let x = model.base_point();
        let y = model.point_at_distance(&x, 2.0);
        let p = heat_kernel_eval(&spec, 20.0, &x, &y).unwrap();
        assert!((p - 1.0 / (4.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn flat_heat_bound_is_euclidean_kernel() {
        let b = heat_lower_bound(2, 0.0, 0.5, 1.0);
        assert!((b - (-0.5f64).exp() / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn default_cutoff_on_spheres() {
        let g = GjmsSpectrum::of(&ManifoldModel::unit_sphere(4).unwrap(), 2).unwrap();
        let c = default_kernel_cutoff(&g, KernelKind::Normalized).unwrap();
        assert!(c.converged);
        assert!(c.cutoff > 100 && c.cutoff < 20_000, "{}", c.cutoff);
    }
}
