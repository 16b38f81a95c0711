//! Full acceptance run at the published tolerances. Prints one line per
//! criterion and fails if any criterion fails.

use std::time::Instant;

use lqg::cgf::RngStream;
use lqg::experiment::{random_phi, run, ExperimentConfig, ExperimentKind, ResultTable};
use lqg::gmc::Flavor;
use lqg::manifolds::{ManifoldKind, ManifoldModel};
use lqg::polyakov::{q_curvature, total_q_invariance_check};
use lqg::spectral::{gjms_sphere_polynomial, lower_bound_check, resolvent_kernel_eval, resolvent_via_heat, GjmsSpectrum, KernelKind};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn cfg(kind: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig::new(kind)
}

fn check(res: &ResultTable, name: &str) -> bool {
    res.checks
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("no check named `{name}`"))
        .pass
}

fn timed(c: &ExperimentConfig) -> (ResultTable, f64) {
    let t0 = Instant::now();
    let r = run(c).unwrap_or_else(|e| panic!("{} failed: {e}", c.kind));
    (r, t0.elapsed().as_secs_f64())
}

fn c01_s2_closed_form() -> Outcome {
    let (r, secs) = timed(&cfg(ExperimentKind::KernelResidual));
    let err = r.summary["max_abs_error"].as_f64().unwrap();
    outcome(
        check(&r, "closed-form error below 1e-3") && secs < 5.0,
        format!("max error {err:.2e} in {secs:.2}s"),
    )
}

fn c02_gjms_polynomials() -> Outcome {
    let s4 = gjms_sphere_polynomial(4);
    let s6 = gjms_sphere_polynomial(6);
    outcome(
        s4 == vec![0, -2, 1] && s6 == vec![0, -24, 10, -1],
        format!("S4 {s4:?}, S6 {s6:?}"),
    )
}

fn c03_residual_stability() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    let t0 = Instant::now();
    for n in [2, 4] {
        let mut c = cfg(ExperimentKind::KernelResidual);
        c.manifold = ManifoldKind::unit_sphere(n);
        c.kernel = Some(KernelKind::Normalized);
        let r = run(&c).unwrap();
        pass &= check(&r, "residual sup changes < 5% under doubled truncation");
        detail.push(format!("S{n} rel {:.1e}", r.summary["relative_change"].as_f64().unwrap_or(f64::NAN)));
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(pass && secs < 60.0, format!("{} in {secs:.2}s", detail.join(", ")))
}

fn c04_resolvent_routes() -> Outcome {
    let model = ManifoldModel::unit_sphere(2).unwrap();
    let spec = model.laplace_spectrum(40).unwrap();
    let mut rng = RngStream::new(4, 0);
    let k = model.normals_per_point();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x = model.uniform_point_from_normals(&rng.normals(k));
        let y = model.uniform_point_from_normals(&rng.normals(k));
        for s in [1.0, 2.0] {
            for alpha in [0.5, 1.0] {
                let a = resolvent_kernel_eval(&spec, s, alpha, false, &x, &y).unwrap();
                let b = resolvent_via_heat(&spec, s, alpha, false, &x, &y).unwrap();
                worst = worst.max((a - b).abs() / a.abs().max(1.0));
            }
        }
    }
    outcome(worst < 1e-5, format!("worst discrepancy {worst:.2e} over 20 pairs x 4 (s, alpha)"))
}

fn c05_heat_lower_bound() -> Outcome {
    let model = ManifoldModel::unit_sphere(2).unwrap();
    let mut held = 0;
    for t in [0.1, 0.5, 1.0] {
        for d in [0.5, 1.5, 3.0] {
            if lower_bound_check(&model, 1.0, t, d, 1e-8).unwrap().holds {
                held += 1;
            }
        }
    }
    outcome(held == 9, format!("{held}/9 grid points"))
}

fn field_covariance() -> ResultTable {
    run(&cfg(ExperimentKind::FieldCovariance)).unwrap()
}

fn c06_covariance_weyl(r: &ResultTable) -> Outcome {
    outcome(
        check(r, "covariances within 3σ") && check(r, "Weyl slope positive") && check(r, "Weyl residual profile bounded"),
        "5 pairs within 3 sigma, Weyl slope and residual profile",
    )
}

fn c07_girsanov(r: &ResultTable) -> Outcome {
    outcome(
        check(r, "Girsanov linear closed form exact") && check(r, "Girsanov capped quadratic 95% overlap"),
        "linear exact, capped quadratic overlap",
    )
}

fn gmc_runs() -> Vec<(f64, ResultTable)> {
    [0.0, 0.5, 1.0, 1.5]
        .into_iter()
        .map(|g| {
            let mut c = cfg(ExperimentKind::GmcMass);
            c.gamma = Some(g);
            c.flavor = Some(Flavor::Plain);
            (g, run(&c).unwrap())
        })
        .collect()
}

fn c08_mean_mass(runs: &[(f64, ResultTable)]) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (g, r) in runs {
        let ok = if *g == 0.0 {
            check(r, "γ = 0 mass equals the volume exactly")
        } else {
            check(r, "mean mass within 3σ")
        };
        pass &= ok;
        detail.push(format!("γ={g}:{}", if ok { "ok" } else { "off" }));
    }
    outcome(pass, detail.join(" "))
}

fn c09_martingale() -> Outcome {
    let r = run(&cfg(ExperimentKind::Martingale)).unwrap();
    outcome(
        check(&r, "slope CI contains 1") && check(&r, "intercept CI contains 0"),
        "ell (10, 40), 500 x 200",
    )
}

fn c10_cameron_martin(runs: &[(f64, ResultTable)]) -> Outcome {
    let ok = runs
        .iter()
        .filter(|(g, _)| *g > 0.0)
        .all(|(_, r)| check(r, "Cameron-Martin weight ratio to 1e-12"));
    outcome(ok, "weight ratio to 1e-12 at γ = 0.5, 1, 1.5")
}

fn c11_conformal_measure() -> Outcome {
    let r = run(&cfg(ExperimentKind::ConformalMeasure)).unwrap();
    outcome(check(&r, "first and second subset moments within 3σ"), "3 subsets, moments 1 and 2")
}

fn c12_total_q() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut rng = RngStream::new(12, 0);
    for (n, ell) in [(2, 24), (4, 14)] {
        let model = ManifoldModel::unit_sphere(n).unwrap();
        let modes = GjmsSpectrum::of(&model, 4).unwrap().mode_set(ell).unwrap();
        let grid = std::sync::Arc::new(model.quadrature_for_band(2 * modes.band() + 4).unwrap());
        let basis = modes.basis(grid);
        for _ in 0..5 {
            let phi = random_phi(&basis, ell, 0.3, 0.0, &mut rng);
            worst = worst.max(total_q_invariance_check(&basis, &phi).unwrap().rel_discrepancy);
        }
    }
    let s2 = q_curvature(&ManifoldModel::unit_sphere(2).unwrap()).unwrap().total;
    let s4 = q_curvature(&ManifoldModel::unit_sphere(4).unwrap()).unwrap().value;
    let pass = worst < 1e-6 && (s4 - 6.0).abs() < 1e-12 && (s2 - 4.0 * std::f64::consts::PI).abs() < 1e-12;
    outcome(pass, format!("worst rel {worst:.1e}, Q(S4) = {s4}, total Q(S2) = {s2:.12}"))
}

fn c13_lbm() -> Outcome {
    let (r, secs) = timed(&cfg(ExperimentKind::LbmRevuz));
    let pass = check(&r, "γ = 0 gives A(t) = t")
        && check(&r, "Revuz 95% overlap (constant)")
        && check(&r, "Revuz 95% overlap (band_limited)")
        && secs < 600.0;
    outcome(pass, format!("clock and Revuz overlap in {secs:.1}s"))
}

fn c14_random_operator() -> Outcome {
    let r = run(&cfg(ExperimentKind::RandomOperator)).unwrap();
    outcome(
        check(&r, "γ = 0 recovers ν")
            && check(&r, "nonnegative spectrum on every sample")
            && check(&r, "energy dissipation to 1e-4"),
        "ν at γ = 0, 100 samples nonnegative, dissipation",
    )
}

fn c15_polyakov() -> Outcome {
    let r = run(&cfg(ExperimentKind::Polyakov)).unwrap();
    outcome(
        check(&r, "routes A and B overlap at 95%") && check(&r, "finiteness gate rejects the boundary"),
        "routes overlap, boundary rejected",
    )
}

fn c16_anomaly() -> Outcome {
    let r = run(&cfg(ExperimentKind::Anomaly)).unwrap();
    outcome(check(&r, "closed form inside the 95% CI"), "adjusted, amplitude 0.1, N = 1e5")
}

fn small(kind: ExperimentKind) -> ExperimentConfig {
    let mut c = cfg(kind);
    match kind {
        ExperimentKind::KernelResidual => {}
        ExperimentKind::Martingale => {
            c.samples = Some(20);
            c.inner = Some(10);
        }
        ExperimentKind::RandomOperator => c.samples = Some(4),
        ExperimentKind::LbmRevuz => c.samples = Some(100),
        _ => c.samples = Some(300),
    }
    c
}

fn c17_thread_reproducibility() -> Outcome {
    let mut differing = Vec::new();
    for kind in ExperimentKind::ALL {
        let mut base = small(kind);
        let mut reference = None;
        for t in [1, 4, 8] {
            base.threads = Some(t);
            let files = run(&base).unwrap().files().unwrap();
            match &reference {
                None => reference = Some(files),
                Some(r) if *r != files => differing.push(format!("{kind}@{t}")),
                _ => {}
            }
        }
    }
    outcome(differing.is_empty(), format!("10 experiments at 1/4/8 threads, differing: {differing:?}"))
}

#[test]
fn acceptance() {
    let fc = field_covariance();
    let gmc = gmc_runs();
    let results: Vec<(u32, Outcome)> = vec![
        (1, c01_s2_closed_form()),
        (2, c02_gjms_polynomials()),
        (3, c03_residual_stability()),
        (4, c04_resolvent_routes()),
        (5, c05_heat_lower_bound()),
        (6, c06_covariance_weyl(&fc)),
        (7, c07_girsanov(&fc)),
        (8, c08_mean_mass(&gmc)),
        (9, c09_martingale()),
        (10, c10_cameron_martin(&gmc)),
        (11, c11_conformal_measure()),
        (12, c12_total_q()),
        (13, c13_lbm()),
        (14, c14_random_operator()),
        (15, c15_polyakov()),
        (16, c16_anomaly()),
        (17, c17_thread_reproducibility()),
    ];
    let mut failed = Vec::new();
    for (n, o) in &results {
        println!("criterion {n:2}: {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(*n);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
