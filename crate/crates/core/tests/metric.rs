mod common;

use approx::assert_relative_eq;
use common::{builtins, fd_cartan, fd_fundamental, rng};
use finsler_core::metric::{
    cartan_tensor, check_metric, fundamental_tensor, metric_value, random_unit, MetricSpec, TangentVector,
};
use finsler_core::FinslerError;
use proptest::prelude::*;

#[test]
fn value_examples() {
    let e = MetricSpec::euclidean(2);
    assert_eq!(metric_value(&e, &TangentVector::from_slices(&[0.0, 0.0], &[3.0, 4.0])).unwrap(), 5.0);
    let r = MetricSpec::randers_constant(&[0.5, 0.0]);
    assert_relative_eq!(metric_value(&r, &TangentVector::from_slices(&[0.0, 0.0], &[1.0, 0.0])).unwrap(), 1.5);
    let f = MetricSpec::funk(2);
    assert_relative_eq!(metric_value(&f, &TangentVector::from_slices(&[0.0, 0.0], &[1.0, 1.0])).unwrap(), 2f64.sqrt());
    assert!(matches!(
        metric_value(&f, &TangentVector::from_slices(&[0.0, 0.0], &[0.0, 0.0])),
        Err(FinslerError::NullDirection(_))
    ));
}

#[test]
fn fundamental_tensor_examples() {
    let e = fundamental_tensor(&MetricSpec::euclidean(2), &TangentVector::from_slices(&[1.0, 2.0], &[0.3, -1.0])).unwrap();
    assert_eq!(e.g, finsler_core::tensor::Matrix::identity(2, 2));
    let s = fundamental_tensor(&MetricSpec::sphere(2), &TangentVector::from_slices(&[0.0, 0.0], &[1.0, 0.0])).unwrap();
    assert_relative_eq!(s.g, finsler_core::tensor::Matrix::identity(2, 2) * 4.0, epsilon = 1e-13);
}

#[test]
fn fundamental_tensor_matches_finite_differences() {
    let mut r = rng(11);
    for m in builtins() {
        for _ in 0..5 {
            let w = m.sample_tangent(&mut r);
            let exact = fundamental_tensor(&m, &w).unwrap().g;
            let fd = fd_fundamental(&m, &w, 1e-4);
            assert!((exact - fd).amax() < 1e-6, "{}", m.name);
        }
    }
}

#[test]
fn cartan_tensor_matches_finite_differences() {
    let mut r = rng(12);
    for m in builtins() {
        let n = m.dim();
        for _ in 0..5 {
            let w = m.sample_tangent(&mut r);
            let c = cartan_tensor(&m, &w).unwrap();
            let (a, b, z) = (random_unit(&mut r, n), random_unit(&mut r, n), random_unit(&mut r, n));
            let fd = fd_cartan(&m, &w, &a, &b, &z, 1e-3);
            assert!((c.apply(&a, &b, &z) - fd).abs() < 1e-5, "{}", m.name);
        }
    }
}

#[test]
fn cartan_tensor_vanishes_for_euclidean() {
    let c = cartan_tensor(&MetricSpec::euclidean(3), &TangentVector::from_slices(&[0.0; 3], &[1.0, -2.0, 0.5])).unwrap();
    assert_eq!(c.c.max_abs(), 0.0);
}

#[test]
fn randers_drift_too_long_is_rejected() {
    let m = MetricSpec::randers_constant(&[1.2, 0.0]);
    let w = TangentVector::from_slices(&[0.0, 0.0], &[-1.0, 0.2]);
    let err = fundamental_tensor(&m, &w);
    assert!(
        matches!(err, Err(FinslerError::NotPositiveDefinite { .. }) | Err(FinslerError::Domain(_))),
        "{err:?}"
    );
    let report = check_metric(&m, 40, 3);
    assert!(!report.passed(1e-10));
}

#[test]
fn builtin_metrics_validate() {
    for m in builtins() {
        let report = check_metric(&m, 40, 5);
        assert!(report.passed(1e-10), "{}: {report:?}", m.name);
    }
}

#[test]
fn funk_is_positively_homogeneous_only() {
    let f = MetricSpec::funk(2);
    let w = TangentVector::from_slices(&[0.3, 0.1], &[0.4, -0.2]);
    let base = metric_value(&f, &w).unwrap();
    assert_relative_eq!(metric_value(&f, &w.scaled(3.0)).unwrap(), 3.0 * base, max_relative = 1e-14);
    assert!((metric_value(&f, &w.scaled(-1.0)).unwrap() - base).abs() > 1e-2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fundamental_tensor_is_scale_invariant(which in 0usize..8, seed in any::<u64>(), lambda in 0.1..10.0f64) {
        let m = &builtins()[which];
        let w = m.sample_tangent(&mut rng(seed));
        let g1 = fundamental_tensor(m, &w).unwrap().g;
        let g2 = fundamental_tensor(m, &w.scaled(lambda)).unwrap().g;
        prop_assert!((g1 - &g2).amax() < 1e-10 * (1.0 + g2.amax()));
    }

    #[test]
    fn cartan_tensor_scales_inversely(which in 0usize..8, seed in any::<u64>(), lambda in 0.1..10.0f64) {
        let m = &builtins()[which];
        let w = m.sample_tangent(&mut rng(seed));
        let c1 = cartan_tensor(m, &w).unwrap().c;
        let c2 = cartan_tensor(m, &w.scaled(lambda)).unwrap().c;
        prop_assert!(c1.sub(&c2.scale(lambda)).max_abs() < 1e-9 * (1.0 + c1.max_abs()));
    }

    #[test]
    fn cartan_tensor_is_symmetric_and_kills_the_base_direction(which in 0usize..8, seed in any::<u64>()) {
        let m = &builtins()[which];
        let mut r = rng(seed);
        let w = m.sample_tangent(&mut r);
        let c = cartan_tensor(m, &w).unwrap();
        prop_assert!(c.c.symmetry_defect() < 1e-11);
        let n = m.dim();
        let (a, b) = (random_unit(&mut r, n), random_unit(&mut r, n));
        prop_assert!(c.apply(&w.y, &a, &b).abs() < 1e-10 * (1.0 + c.c.max_abs()));
    }

    #[test]
    fn euler_identity_for_the_square(which in 0usize..8, seed in any::<u64>()) {
        let m = &builtins()[which];
        let w = m.sample_tangent(&mut rng(seed));
        let f = metric_value(m, &w).unwrap();
        let g = fundamental_tensor(m, &w).unwrap();
        prop_assert!((g.apply(&w.y, &w.y) - f * f).abs() < 1e-11 * (1.0 + f * f));
    }
}
