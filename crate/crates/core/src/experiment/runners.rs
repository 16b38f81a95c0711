use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde_json::json;

use super::config::{ExperimentConfig, ExperimentKind};
use super::output::{num, ResultTable, Table};
use crate::cgf::{
    derive_seed, girsanov_linear_closed_form, girsanov_shift_check, purpose, sample_field_at,
    RngStream,
};
use crate::dynamics::{
    additive_functional, energy_dissipation_check, form_conformal_check, random_gjms_assemble, revuz_check,
    revuz_field, simulate_bm, time_change, RevuzSetup,
};
use crate::error::{LqgError, Result};
use crate::gmc::{
    ball_indices, ball_scaling_stats, cameron_martin_shift_check, conformal_measure_check, martingale_check,
    total_masses, Flavor, LqgBuilder, Scheme,
};
use crate::manifolds::{ManifoldKind, ManifoldModel, Point, QuadratureGrid};
use crate::polyakov::{
    conformal_anomaly_check, partition_function, q_curvature, total_q_invariance_check, PolyakovFlavor,
    PolyakovParams,
};
use crate::spectral::{
    covariance_form, default_kernel_cutoff, distance_ladder, kernel_ladder, residual_sup, weyl_check, ConformalChange,
    GjmsSpectrum, GridBasis, KernelEvaluator, KernelKind, ModeSet,
};
use crate::stats::{covariance_estimate, Estimate};

/// Run one experiment, on a dedicated pool when `threads` is set.
pub fn run(config: &ExperimentConfig) -> Result<ResultTable> {
    let model = config.validate()?;
    match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| LqgError::Config(e.to_string()))?
            .install(|| dispatch(config, &model)),
        None => dispatch(config, &model),
    }
}

fn dispatch(cfg: &ExperimentConfig, model: &ManifoldModel) -> Result<ResultTable> {
    match cfg.kind {
        ExperimentKind::KernelResidual => kernel_residual(cfg, model),
        ExperimentKind::FieldCovariance => field_covariance(cfg, model),
        ExperimentKind::GmcMass => gmc_mass(cfg, model),
        ExperimentKind::Martingale => martingale(cfg, model),
        ExperimentKind::ConformalMeasure => conformal_measure(cfg, model),
        ExperimentKind::BallScaling => ball_scaling(cfg, model),
        ExperimentKind::LbmRevuz => lbm_revuz(cfg, model),
        ExperimentKind::RandomOperator => random_operator(cfg, model),
        ExperimentKind::Polyakov => polyakov(cfg, model),
        ExperimentKind::Anomaly => anomaly(cfg, model),
    }
}

/// First `ell` nonconstant modes, growing the spectrum cutoff until they fit.
pub fn modes_for(model: &ManifoldModel, cutoff: Option<usize>, ell: usize) -> Result<Arc<ModeSet>> {
    if let Some(c) = cutoff {
        return GjmsSpectrum::of(model, c)?.mode_set(ell);
    }
    let mut c = 2;
    loop {
        let s = GjmsSpectrum::of(model, c)?;
        if s.base().mode_count() > ell + 1 {
            return s.mode_set(ell);
        }
        c *= 2;
    }
}

/// Quadrature fine enough for products of two retained modes.
pub fn grid_for(model: &ManifoldModel, modes: &ModeSet, resolution: Option<usize>) -> Result<Arc<QuadratureGrid>> {
    Ok(Arc::new(match resolution {
        Some(r) => model.quadrature(r)?,
        None => model.quadrature_for_band(2 * modes.band() + 4)?,
    }))
}

/// Random coefficients on modes `1..=count`, scaled so that the grid sup of
/// `φ` equals `amplitude`, plus a constant `offset`.
pub fn random_phi(basis: &GridBasis, count: usize, amplitude: f64, offset: f64, rng: &mut RngStream) -> Vec<f64> {
    let m = basis.n_modes();
    let mut c = vec![0.0; m];
    for v in c.iter_mut().take((count + 1).min(m)).skip(1) {
        *v = rng.normal();
    }
    let sup = basis.synthesize(&c).iter().map(|v| v.abs()).fold(0.0, f64::max);
    if sup > 0.0 {
        for v in c.iter_mut() {
            *v *= amplitude / sup;
        }
    }
    c[0] = offset * basis.modes().model().volume().sqrt();
    c
}

/// Modes of band at most 3, the "band-limited" test functions.
fn low_mode_count(modes: &ModeSet) -> usize {
    modes.modes().iter().skip(1).take_while(|m| m.band() <= 3).count()
}

fn est_json(e: &Estimate) -> serde_json::Value {
    json!({"value": e.value, "std_err": e.std_err})
}

fn kernel_residual(cfg: &ExperimentConfig, model: &ManifoldModel) -> Result<ResultTable> {
    let mut res = ResultTable::new(cfg);
    let unit_s2 = matches!(model.kind(), ManifoldKind::Sphere { n: 2, radius } if *radius == 1.0);
    let oracle = KernelKind::GroundedResolvent { s: 1.0, alpha: 0.0 };
    let kind = cfg.kernel.unwrap_or(if unit_s2 { oracle } else { KernelKind::Normalized });
    if unit_s2 && kind == oracle {
        let cutoff = cfg.cutoff.unwrap_or(200);
        let ev = KernelEvaluator::laplace(&model.laplace_spectrum(cutoff)?, kind)?;
        let mut table = Table::new("ladder", &["d", "kernel_value", "closed_form", "error"]);
        let mut max_err: f64 = 0.0;
        for d in distance_ladder(0.1, PI - 0.1, 50) {
            let v = ev.eval_at_distance(d);
            let exact = -(1.0 + 2.0 * (0.5 * d).sin().ln()) / (4.0 * PI);
            max_err = max_err.max((v - exact).abs());
            table.push(vec![num(d), num(v), num(exact), num(v - exact)]);
        }
        res.check("closed-form error below 1e-3", max_err < 1e-3);
        res.summary = json!({"kernel": kind, "cutoff": cutoff, "max_abs_error": max_err});
        res.tables.push(table);
        return Ok(res);
    }
    let base = GjmsSpectrum::of(model, 4)?;
    let choice = default_kernel_cutoff(&base, kind)?;
    let cutoff = cfg.cutoff.unwrap_or(choice.cutoff);
    let coefficient = match kind {
        KernelKind::Normalized => 1.0,
        KernelKind::CopolyGreen => 1.0 / base.a_n(),
        _ => 0.0,
    };
    let distances = distance_ladder(0.05, 0.5 * PI, 50);
    let ladder = |c: usize| -> Result<_> {
        let s = GjmsSpectrum::of(model, c)?;
        Ok(kernel_ladder(&KernelEvaluator::new(&s, kind)?, &distances, coefficient))
    };
    let (r1, r2) = (ladder(cutoff)?, ladder(2 * cutoff)?);
    let (s1, s2) = (residual_sup(&r1), residual_sup(&r2));
    let rel = (s2 - s1).abs() / s1.abs().max(f64::MIN_POSITIVE);
    let mut table = Table::new("ladder", &["d", "kernel_value", "residual", "residual_doubled"]);
    for (a, b) in r1.iter().zip(&r2) {
        table.push(vec![num(a.d), num(a.kernel_value), num(a.residual_vs_log), num(b.residual_vs_log)]);
    }
    res.check("residual sup changes < 5% under doubled truncation", rel < 0.05);
    res.summary = json!({
        "kernel": kind,
        "cutoff": cutoff,
        "default_cutoff_converged": choice.converged,
        "residual_sup": s1,
        "residual_sup_doubled": s2,
        "relative_change": rel,
    });
    res.tables.push(table);
    Ok(res)
}

fn field_covariance(cfg: &ExperimentConfig, model: &ManifoldModel) -> Result<ResultTable> {
    let mut res = ResultTable::new(cfg);
    let n = cfg.samples.unwrap_or(10_000);
    let modes = modes_for(model, cfg.cutoff, cfg.ell.unwrap_or(48))?;
    let low = low_mode_count(&modes).max(1);
    let mut aux = RngStream::for_purpose(cfg.seed, purpose::AUX, 0);
    let mut band_limited = || -> Vec<f64> {
        let mut u = vec![0.0; modes.len()];
        for v in u.iter_mut().skip(1).take(low) {
            *v = aux.normal();
        }
        u
    };
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..5).map(|_| (band_limited(), band_limited())).collect();
    let pairings: Vec<Vec<f64>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let s = sample_field_at(&modes, cfg.seed, i);
            pairs.iter().flat_map(|(u, v)| [s.pair(u), s.pair(v)]).collect()
        })
        .collect();
    let mut table = Table::new("pairs", &["pair", "empirical", "std_err", "predicted", "z"]);
    let mut all = true;
    for (k, (u, v)) in pairs.iter().enumerate() {
        let a: Vec<f64> = pairings.iter().map(|r| r[2 * k]).collect();
        let b: Vec<f64> = pairings.iter().map(|r| r[2 * k + 1]).collect();
        let e = covariance_estimate(&a, &b);
        let p = covariance_form(&modes, u, v);
        let z = (e.value - p) / e.std_err;
        all &= z.abs() <= 3.0;
        table.push(vec![k.to_string(), num(e.value), num(e.std_err), num(p), num(z)]);
    }
    res.check("covariances within 3σ", all);

    let mut c = 8;
    let weyl = loop {
        let s = GjmsSpectrum::of(model, c)?;
        if s.base().mode_count() >= 2000 {
            break weyl_check(&s)?;
        }
        c *= 2;
    };
    res.check("Weyl slope positive", weyl.slope > 0.0);
    res.check("Weyl residual profile bounded", weyl.bounded);

    let mut phi = band_limited();
    let scale = 0.5 / phi.iter().map(|v| v.abs()).fold(0.0, f64::max);
    phi.iter_mut().for_each(|v| *v *= scale);
    let u = band_limited();
    let (lhs, rhs) = girsanov_linear_closed_form(&modes, &phi, &u);
    let lin_err = (lhs - rhs).abs() / rhs.abs();
    res.check("Girsanov linear closed form exact", lin_err < 1e-12);
    let cap = 4.0 * covariance_form(&modes, &u, &u);
    let gn = 10 * n;
    let g = girsanov_shift_check(
        &modes,
        &phi,
        |s| s.pair(&u).powi(2).min(cap),
        gn,
        derive_seed(cfg.seed, purpose::AUX),
    );
    res.check("Girsanov capped quadratic 95% overlap", g.overlap_95);
    res.summary = json!({
        "samples": n,
        "ell": modes.ell(),
        "weyl": weyl,
        "girsanov_linear_rel_error": lin_err,
        "girsanov_samples": gn,
        "girsanov": g,
    });
    res.tables.push(table);
    Ok(res)
}

fn builder(cfg: &ExperimentConfig, model: &ManifoldModel, ell: usize, gamma: f64, flavor: Flavor) -> Result<LqgBuilder> {
    let modes = modes_for(model, cfg.cutoff, cfg.ell.unwrap_or(ell))?;
    let grid = grid_for(model, &modes, cfg.resolution)?;
    LqgBuilder::new(&modes, grid, gamma, flavor, cfg.scheme.unwrap_or(Scheme::Eigenfunction))
}

fn gmc_mass(cfg: &ExperimentConfig, model: &ManifoldModel) -> Result<ResultTable> {
    let mut res = ResultTable::new(cfg);
    let n = cfg.samples.unwrap_or(10_000);
    let gamma = cfg.gamma.unwrap_or(1.0);
    let flavor = cfg.flavor.unwrap_or(Flavor::Plain);
    let b = builder(cfg, model, 48, gamma, flavor)?;
    let masses = total_masses(&b, n, cfg.seed);
    let vol = model.volume();
    let est = Estimate::from_samples(&masses);
    let expected = match (flavor, b.r_g()) {
        (Flavor::Plain, _) => Some(vol),
        (Flavor::Adjusted, Some(r)) => Some(
            b.basis()
                .grid()
                .weights()
                .iter()
                .zip(r)
                .map(|(w, r)| w * (0.5 * gamma * gamma * r).exp())
                .sum(),
        ),
        _ => None,
    };
    if gamma == 0.0 && flavor == Flavor::Plain {
        let exact = masses.iter().all(|m| (m - vol).abs() <= 1e-12 * vol);
        res.check("γ = 0 mass equals the volume exactly", exact);
    } else if let Some(e) = expected {
        res.check("mean mass within 3σ", est.within_sigma(e, 3.0));
    }
    let modes = b.basis().modes().clone();
    let mut aux = RngStream::for_purpose(cfg.seed, purpose::AUX, 0);
    let mut cm: f64 = 0.0;
    for k in 0..5u64 {
        let phi = random_phi(b.basis(), modes.ell(), 1.0, 0.0, &mut aux);
        let s = sample_field_at(&modes, derive_seed(cfg.seed, purpose::AUX), k);
        cm = cm.max(cameron_martin_shift_check(&b, &s, &phi));
    }
    if b.flavor() != Flavor::Refined && b.scheme() == Scheme::Eigenfunction {
        res.check("Cameron-Martin weight ratio to 1e-12", cm < 1e-12);
    }
    let mut table = Table::new("masses", &["index", "mass"]);
    for (i, m) in masses.iter().enumerate() {
        table.push(vec![i.to_string(), num(*m)]);
    }
    res.summary = json!({
        "samples": n,
        "gamma": gamma,
        "flavor": flavor,
        "ell": modes.ell(),
        "grid_points": b.n_points(),
        "mean_mass": est_json(&est),
        "expected_mean": expected,
        "mass_variance": crate::stats::variance(&masses),
        "cameron_martin_max_rel": cm,
    });
    res.tables.push(table);
    Ok(res)
}

fn martingale(cfg: &ExperimentConfig, model: &ManifoldModel) -> Result<ResultTable> {
    let mut res = ResultTable::new(cfg);
    let gamma = cfg.gamma.unwrap_or(1.0);
    let modes = modes_for(model, cfg.cutoff, cfg.ell.unwrap_or(40))?;
    let grid = grid_for(model, &modes, cfg.resolution)?;
    let subset = ball_indices(&grid, model, &model.base_point(), 1.0);
    let r = martingale_check(
        &modes,
        grid,
        gamma,
        &subset,
        cfg.ell_coarse.unwrap_or(10),
        cfg.samples.unwrap_or(500),
        cfg.inner.unwrap_or(200),
        cfg.seed,
    )?;
    res.check("slope CI contains 1", r.slope_ci_contains_one);
    res.check("intercept CI contains 0", r.intercept_ci_contains_zero);
    let mut table = Table::new("fit", &["parameter", "estimate", "std_err", "ci_lo", "ci_hi"]);
    for (name, e) in [("intercept", r.fit.intercept), ("slope", r.fit.slope)] {
        let (lo, hi) = e.ci(0.95);
        table.push(vec![name.into(), num(e.value), num(e.std_err), num(lo), num(hi)]);
    }
    res.summary = serde_json::to_value(&r)?;
    res.tables.push(table);
    Ok(res)
}

fn conformal_measure(cfg: &ExperimentConfig, model: &ManifoldModel) -> Result<ResultTable> {
    let mut res = ResultTable::new(cfg);
    let gamma = cfg.gamma.unwrap_or(1.0);
    let b = builder(cfg, model, 24, gamma, Flavor::Plain)?;
    let basis = b.basis().clone();
    let low = low_mode_count(basis.modes());
    let phi = random_phi(
        &basis,
        low,
        cfg.phi_amplitude.unwrap_or(0.2),
        0.0,
        &mut RngStream::for_purpose(cfg.seed, purpose::AUX, 0),
    );
    let change = ConformalChange::new(basis.clone(), &phi)?;
    let x0 = model.base_point();
    let grid = basis.grid();
    let subsets = vec![
        ball_indices(grid, model, &x0, 0.9),
        ball_indices(grid, model, &model.point_at_distance(&x0, 2.0), 1.2),
        ball_indices(grid, model, &model.point_at_distance(&x0, 1.0), 0.7),
    ];
    let r = conformal_measure_check(&b, &change, &subsets, cfg.samples.unwrap_or(10_000), cfg.seed)?;
    res.check("first and second subset moments within 3σ", r.pass);
    let mut table = Table::new(
        "moments",
        &["subset", "moment", "transformed", "transformed_se", "direct", "direct_se", "z"],
    );
    for (k, s) in r.subsets.iter().enumerate() {
        for (m, t, d, z) in [
            (1, s.first_transformed, s.first_direct, s.z_first),
            (2, s.second_transformed, s.second_direct, s.z_second),
        ] {
            table.push(vec![
                k.to_string(),
                m.to_string(),
                num(t.value),
                num(t.std_err),
                num(d.value),
                num(d.std_err),
                num(z),
            ]);
        }
    }
    res.summary = json!({
        "gamma": gamma,
        "phi_coeffs": phi,
        "xi_variance": change.xi_variance(),
        "report": r,
    });
    res.tables.push(table);
    Ok(res)
}

fn ball_scaling(cfg: &ExperimentConfig, model: &ManifoldModel) -> Result<ResultTable> {
    let mut res = ResultTable::new(cfg);
    let gamma = cfg.gamma.unwrap_or(1.0);
    let modes = modes_for(model, cfg.cutoff, cfg.ell.unwrap_or(48))?;
    let grid = Arc::new(model.quadrature(cfg.resolution.unwrap_or(32))?);
    let b = LqgBuilder::new(&modes, grid, gamma, Flavor::Plain, cfg.scheme.unwrap_or(Scheme::Eigenfunction))?;
    let scale = model.diameter() / PI;
    let radii: Vec<f64> = [0.25, 0.35, 0.5, 0.7, 1.0].iter().map(|r| r * scale).collect();
    let levels = [0.1, 0.5, 0.9];
    let r = ball_scaling_stats(&b, &model.base_point(), &radii, &levels, cfg.samples.unwrap_or(2000), cfg.seed)?;
    let means_ok = r.mean_mass.iter().zip(&r.grid_volume).all(|(e, v)| e.within_sigma(*v, 3.0));
    res.check("ball means within 3σ of ball volumes", means_ok);
    res.check("ball masses increase with radius", r.monotone_fraction == 1.0);
    let mut header = vec!["radius", "grid_volume", "mean_mass", "mean_se"];
    let qnames: Vec<String> = levels.iter().map(|q| format!("q{q}")).collect();
    header.extend(qnames.iter().map(|s| s.as_str()));
    let mut table = Table::new("balls", &header);
    for k in 0..radii.len() {
        let mut row = vec![num(radii[k]), num(r.grid_volume[k]), num(r.mean_mass[k].value), num(r.mean_mass[k].std_err)];
        row.extend(r.quantiles.iter().map(|q| num(q[k])));
        table.push(row);
    }
    res.summary = serde_json::to_value(&r)?;
    res.tables.push(table);
    Ok(res)
}

fn lbm_revuz(cfg: &ExperimentConfig, model: &ManifoldModel) -> Result<ResultTable> {
    let mut res = ResultTable::new(cfg);
    let gamma = cfg.gamma.unwrap_or(1.0);
    if gamma.abs() >= 2.0 {
        return Err(LqgError::InvalidParameter(format!("|γ| < 2 required for the Revuz check (got {gamma})")));
    }
    let t = cfg.time.unwrap_or(1.0);
    if t > 1.0 {
        return Err(LqgError::InvalidParameter(format!("Revuz horizon must be ≤ 1 (got {t})")));
    }
    let dt = cfg.dt.unwrap_or(0.01);
    let modes = modes_for(model, cfg.cutoff, cfg.ell.unwrap_or(24))?;
    let grid = match cfg.resolution {
        Some(r) => model.quadrature(r)?,
        None => model.quadrature_for_band(31)?,
    };
    let sample = revuz_field(&modes, cfg.seed);
    let setup = RevuzSetup {
        x0: model.base_point(),
        t,
        dt,
        gamma,
        heat_cutoff: 20,
    };
    let n = cfg.samples.unwrap_or(10_000);

    let path = simulate_bm(model, &setup.x0, t, dt, &mut RngStream::for_purpose(cfg.seed, purpose::PATHS, 0))?;
    let clock = additive_functional(&path, &sample, 0.0);
    let clock_err = clock.times.iter().zip(&clock.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    res.check("γ = 0 gives A(t) = t", clock_err < 1e-12);

    let mut table = Table::new("revuz", &["u", "lhs", "lhs_se", "rhs", "overlap_95"]);
    let mut reports = Vec::new();
    let tests: [(&str, fn(&Point) -> f64); 2] = [
        ("constant", |_| 1.0),
        ("band_limited", |x| 1.0 + 0.5 * x.coords[0].cos() + 0.3 * x.coords[1].sin()),
    ];
    for (name, u) in tests {
        let r = revuz_check(&setup, &sample, u, &grid, n, cfg.seed)?;
        res.check(&format!("Revuz 95% overlap ({name})"), r.overlap_95);
        table.push(vec![name.into(), num(r.lhs.value), num(r.lhs.std_err), num(r.rhs), r.overlap_95.to_string()]);
        reports.push(json!({"u": name, "report": r}));
    }
    res.tables.push(table);

    let a = additive_functional(&path, &sample, gamma);
    let total = *a.values.last().unwrap();
    let lbm = time_change(&path, &a, total, total / 100.0)?;
    let mut ta = Table::new("functional", &["t", "A"]);
    for (s, v) in a.times.iter().zip(&a.values) {
        ta.push(vec![num(*s), num(*v)]);
    }
    let mut header: Vec<String> = vec!["t".into(), "tau".into()];
    header.extend((0..model.dimension()).map(|i| format!("c{i}")));
    let header_ref: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut tp = Table::new("path", &header_ref);
    for ((s, tau), p) in lbm.times.iter().zip(&lbm.tau).zip(&lbm.positions) {
        let mut row = vec![num(*s), num(*tau)];
        row.extend(p.coords.iter().map(|c| num(*c)));
        tp.push(row);
    }
    res.tables.push(ta);
    res.tables.push(tp);
    res.summary = json!({
        "gamma": gamma,
        "t": t,
        "dt": dt,
        "paths": n,
        "ell": modes.ell(),
        "clock_max_error": clock_err,
        "revuz": reports,
        "example_path_total_A": total,
        "example_path_truncated": lbm.truncated,
    });
    Ok(res)
}

fn random_operator(cfg: &ExperimentConfig, model: &ManifoldModel) -> Result<ResultTable> {
    let mut res = ResultTable::new(cfg);
    let gamma = cfg.gamma.unwrap_or(1.0);
    let b = builder(cfg, model, 35, gamma, Flavor::Plain)?;
    let basis = b.basis().clone();
    let modes = basis.modes().clone();

    let det = random_gjms_assemble(&basis, basis.grid().weights())?;
    let mut nu = modes.nu().to_vec();
    nu.sort_by(f64::total_cmp);
    let nu_err = det
        .theta()
        .iter()
        .zip(&nu)
        .map(|(a, b)| (a - b).abs() / b.max(1.0))
        .fold(0.0, f64::max);
    res.check("γ = 0 recovers ν", nu_err < 1e-10);

    let n = cfg.samples.unwrap_or(100);
    let ops: Vec<(f64, f64)> = (0..n as u64)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let s = sample_field_at(&modes, cfg.seed, i);
            let op = random_gjms_assemble(&basis, &b.build(&s).weights)?;
            Ok((op.min_relative_eigenvalue(), op.epsilon()))
        })
        .collect::<Result<_>>()?;
    let min_rel = ops.iter().map(|o| o.0).fold(f64::INFINITY, f64::min);
    let max_eps = ops.iter().map(|o| o.1).fold(0.0, f64::max);
    res.check("nonnegative spectrum on every sample", min_rel >= -1e-10);

    let op = random_gjms_assemble(&basis, &b.build(&sample_field_at(&modes, cfg.seed, 0)).weights)?;
    let u0: Vec<f64> = (0..op.len()).map(|j| 1.0 / (1.0 + j as f64)).collect();
    let diss = energy_dissipation_check(&op, &u0, &[0.0, 0.01, 0.05, 0.1, 0.5, 1.0]);
    res.check("energy dissipation to 1e-4", diss.max_rel_error < 1e-4);
    res.check("energy nonincreasing", diss.energy_nonincreasing);
    res.check("mass conserved", diss.mass_drift < 1e-10);

    let mut aux = RngStream::for_purpose(cfg.seed, purpose::AUX, 0);
    let phi = random_phi(&basis, modes.ell(), 0.3, 0.0, &mut aux);
    let change = ConformalChange::new(basis.clone(), &phi)?;
    let u = aux.normals(modes.len());
    let v = aux.normals(modes.len());
    let (lhs, rhs) = form_conformal_check(&change, &u, &v);
    let form_err = (lhs - rhs).abs() / rhs.abs().max(1.0);
    res.check("form-level conformal invariance", form_err < 1e-10);

    let mut spectrum = Table::new("spectrum", &["index", "theta"]);
    for (i, t) in op.theta().iter().enumerate() {
        spectrum.push(vec![i.to_string(), num(*t)]);
    }
    let mut dtab = Table::new("dissipation", &["t", "energy", "fd_derivative", "dissipation", "rel_error"]);
    for r in &diss.rows {
        dtab.push(vec![num(r.t), num(r.energy), num(r.fd_derivative), num(r.dissipation), num(r.rel_error)]);
    }
    res.summary = json!({
        "gamma": gamma,
        "ell": modes.ell(),
        "samples": n,
        "gamma_zero_max_rel_error": nu_err,
        "min_relative_eigenvalue": min_rel,
        "max_regularization": max_eps,
        "dissipation_max_rel_error": diss.max_rel_error,
        "mass_drift": diss.mass_drift,
        "form_invariance_rel_error": form_err,
    });
    res.tables.push(spectrum);
    res.tables.push(dtab);
    Ok(res)
}

fn polyakov(cfg: &ExperimentConfig, model: &ManifoldModel) -> Result<ResultTable> {
    let mut res = ResultTable::new(cfg);
    let q = q_curvature(model)?;
    let flavor = cfg.polyakov_flavor.unwrap_or(PolyakovFlavor::Plain);
    let gamma = cfg.gamma.unwrap_or(1.0);
    let params = PolyakovParams {
        flavor,
        gamma,
        theta: cfg.theta.unwrap_or(1.0 / PI),
        theta_star: cfg.theta_star.unwrap_or(-5.0),
        m: cfg.m.unwrap_or(1.0),
    };
    params.check(model.dimension(), q.total)?;
    let boundary = match flavor {
        PolyakovFlavor::Plain => PolyakovParams {
            theta_star: -params.theta * q.total,
            ..params
        },
        PolyakovFlavor::Adjusted => PolyakovParams { theta: 0.0, ..params },
    };
    let boundary_rejected = matches!(boundary.check(model.dimension(), q.total), Err(LqgError::GateViolated(_)));
    res.check("finiteness gate rejects the boundary", boundary_rejected);

    let b = builder(cfg, model, 24, gamma, params.measure_flavor())?;
    let r = partition_function(&params, &b, cfg.samples.unwrap_or(100_000), cfg.seed)?;
    res.check("routes A and B overlap at 95%", r.overlap_95);

    let mut aux = RngStream::for_purpose(cfg.seed, purpose::AUX, 0);
    let mut q_rel: f64 = 0.0;
    for _ in 0..5 {
        let phi = random_phi(b.basis(), b.basis().modes().ell(), 0.3, 0.0, &mut aux);
        q_rel = q_rel.max(total_q_invariance_check(b.basis(), &phi)?.rel_discrepancy);
    }
    res.check("total Q invariant to 1e-6", q_rel < 1e-6);

    let mut table = Table::new("routes", &["route", "estimate", "std_err", "ci_lo", "ci_hi"]);
    for (name, e) in [("A", r.route_a), ("B", r.route_b)] {
        let (lo, hi) = e.ci(0.95);
        table.push(vec![name.into(), num(e.value), num(e.std_err), num(lo), num(hi)]);
    }
    res.summary = json!({
        "q_curvature": q,
        "boundary_rejected": boundary_rejected,
        "total_q_max_rel": q_rel,
        "partition": r,
    });
    res.tables.push(table);
    Ok(res)
}

fn anomaly(cfg: &ExperimentConfig, model: &ManifoldModel) -> Result<ResultTable> {
    let mut res = ResultTable::new(cfg);
    let flavor = cfg.polyakov_flavor.unwrap_or(PolyakovFlavor::Adjusted);
    let gamma = cfg.gamma.unwrap_or(1.0);
    let n = model.dimension();
    let m = cfg.m.unwrap_or(1.0);
    let params = match flavor {
        PolyakovFlavor::Plain => PolyakovParams::special_plain(n, gamma, m),
        PolyakovFlavor::Adjusted => PolyakovParams::special_adjusted(n, gamma, m),
    };
    let b = builder(cfg, model, 24, gamma, params.measure_flavor())?;
    let basis = b.basis().clone();
    let phi = random_phi(
        &basis,
        low_mode_count(basis.modes()),
        cfg.phi_amplitude.unwrap_or(0.1),
        0.05,
        &mut RngStream::for_purpose(cfg.seed, purpose::AUX, 0),
    );
    let change = ConformalChange::new(basis, &phi)?;
    let r = conformal_anomaly_check(&params, &b, &change, cfg.samples.unwrap_or(100_000), cfg.seed)?;
    res.check("closed form inside the 95% CI", r.contains_95);
    let mut table = Table::new("anomaly", &["flavor", "predicted", "estimate", "std_err"]);
    let fl = match flavor {
        PolyakovFlavor::Plain => "plain",
        PolyakovFlavor::Adjusted => "adjusted",
    };
    table.push(vec![fl.into(), num(r.anomaly_pred), num(r.anomaly_est.value), num(r.anomaly_est.std_err)]);
    res.summary = json!({"phi_coeffs": phi, "report": r});
    res.tables.push(table);
    Ok(res)
}
