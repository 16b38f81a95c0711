use std::sync::Arc;

use approx::assert_relative_eq;
use proptest::prelude::*;

use lqg::cgf::{sample_field_at, RngStream};
use lqg::dynamics::{additive_functional, simulate_bm, time_change};
use lqg::gmc::{cameron_martin_shift_check, Flavor, LqgBuilder, Scheme};
use lqg::manifolds::ManifoldModel;
use lqg::polyakov::{a_integral_log, gamma_reduction_log, total_q_invariance_check};
use lqg::spectral::{gjms_of_lambda, gjms_sphere_polynomial, ConformalChange, GjmsSpectrum, GridBasis, ModeSet};
use lqg::stats::Estimate;

fn s2_basis() -> (Arc<ModeSet>, Arc<GridBasis>) {
    let model = ManifoldModel::unit_sphere(2).unwrap();
    let modes = GjmsSpectrum::of(&model, 6).unwrap().mode_set(15).unwrap();
    let grid = Arc::new(model.quadrature_for_band(2 * modes.band() + 4).unwrap());
    let basis = Arc::new(modes.basis(grid));
    (modes, basis)
}

fn coeffs(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.15f64..0.15, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // the polynomial is in Δ, which acts as -λ
    #[test]
    fn sphere_gjms_polynomial_matches_product(n in prop::sample::select(vec![2usize, 4, 6]), l in 0u32..40) {
        let lambda = (l * (l + n as u32 - 1)) as f64;
        let poly: f64 = gjms_sphere_polynomial(n)
            .iter()
            .enumerate()
            .map(|(k, c)| *c as f64 * (-lambda).powi(k as i32))
            .sum();
        let product = gjms_of_lambda(n, (n - 1) as f64, lambda);
        prop_assert!((poly - product).abs() <= 1e-9 * product.abs().max(1.0));
    }

    #[test]
    fn sphere_gjms_is_nonnegative(n in prop::sample::select(vec![2usize, 4, 6]), l in 0u32..60) {
        let lambda = (l * (l + n as u32 - 1)) as f64;
        prop_assert!(gjms_of_lambda(n, (n - 1) as f64, lambda) >= 0.0);
    }

    #[test]
    fn a_integral_matches_gamma_identity(c in -4.0f64..-0.2, gamma in 0.3f64..1.9, mass in 0.05f64..50.0) {
        let a = a_integral_log(c, gamma, mass);
        let b = gamma_reduction_log(c, gamma, mass);
        prop_assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn confidence_interval_is_symmetric(v in prop::collection::vec(-10.0f64..10.0, 2..50)) {
        let e = Estimate::from_samples(&v);
        let (lo, hi) = e.ci(0.95);
        prop_assert!(lo <= e.value && e.value <= hi);
        prop_assert!(((e.value - lo) - (hi - e.value)).abs() < 1e-9 * (1.0 + e.value.abs()));
    }

    #[test]
    fn rng_streams_are_reproducible(seed in any::<u64>(), stream in 0u64..1000) {
        let a = RngStream::new(seed, stream).normals(8);
        let b = RngStream::new(seed, stream).normals(8);
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cameron_martin_shift_is_exact(phi in coeffs(16), gamma in 0.1f64..1.9, seed in 0u64..1000) {
        let (modes, basis) = s2_basis();
        let b = LqgBuilder::from_basis(basis, gamma, Flavor::Plain, Scheme::Eigenfunction).unwrap();
        let s = sample_field_at(&modes, seed, 0);
        prop_assert!(cameron_martin_shift_check(&b, &s, &phi) < 1e-12);
    }

    #[test]
    fn total_q_is_conformally_invariant(phi in coeffs(16)) {
        let (_, basis) = s2_basis();
        let r = total_q_invariance_check(&basis, &phi).unwrap();
        prop_assert!(r.rel_discrepancy < 1e-6, "{}", r.rel_discrepancy);
    }

    #[test]
    fn conformal_change_is_grid_consistent(phi in coeffs(16)) {
        let (_, basis) = s2_basis();
        let change = ConformalChange::new(basis.clone(), &phi).unwrap();
        let ones = vec![1.0; basis.n_points()];
        assert_relative_eq!(change.mean_prime(&ones), 1.0, epsilon = 1e-12);
        prop_assert!(change.volume_prime() > 0.0);
        prop_assert!(change.xi_variance() >= 0.0);
    }

    #[test]
    fn time_change_is_monotone(seed in 0u64..500, gamma in 0.0f64..1.5) {
        let model = ManifoldModel::torus(vec![2.0 * std::f64::consts::PI; 2]).unwrap();
        let modes = GjmsSpectrum::of(&model, 4).unwrap().mode_set(12).unwrap();
        let sample = sample_field_at(&modes, seed, 0);
        let mut rng = RngStream::new(seed, 1);
        let path = simulate_bm(&model, &model.base_point(), 1.0, 0.01, &mut rng).unwrap();
        let a = additive_functional(&path, &sample, gamma);
        prop_assert!(a.values.windows(2).all(|w| w[1] > w[0]));
        let x = time_change(&path, &a, 0.5, 0.01).unwrap();
        prop_assert!(x.tau.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(x.tau.iter().all(|t| *t <= 1.0 + 1e-12));
    }
}

#[test]
fn unit_sphere_volume_weights() {
    let (_, basis) = s2_basis();
    assert_relative_eq!(basis.grid().total_weight(), 4.0 * std::f64::consts::PI, max_relative = 1e-12);
}
