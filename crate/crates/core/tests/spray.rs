mod common;

use common::{builtins, euler_lagrange_spray, rng};
use finsler_core::metric::{fundamental_tensor, random_unit, MetricKind, MetricSpec};
use finsler_core::oracle::riemann_operator;
use finsler_core::spray::{curvature_endomorphism, flag_curvature, spray_coefficients};
use proptest::prelude::*;

#[test]
fn spray_matches_euler_lagrange_oracle() {
    let mut r = rng(21);
    for m in builtins() {
        for _ in 0..5 {
            let w = m.sample_tangent(&mut r);
            let g = spray_coefficients(&m, &w).unwrap().g;
            let oracle = euler_lagrange_spray(&m, &w, 1e-4);
            assert!((&g - &oracle).amax() < 1e-5 * (1.0 + g.amax()), "{}: {g} vs {oracle}", m.name);
        }
    }
}

#[test]
fn constant_curvature_models() {
    let mut r = rng(22);
    let cases = [
        (MetricSpec::sphere(2), 1.0),
        (MetricSpec::sphere(3), 1.0),
        (MetricSpec::hyperbolic(2), -1.0),
        (MetricSpec::funk(2), -0.25),
        (MetricSpec::funk(3), -0.25),
        (MetricSpec::randers_constant(&[0.5, 0.0]), 0.0),
    ];
    for (m, expected) in cases {
        for _ in 0..10 {
            let w = m.sample_tangent(&mut r);
            let u = random_unit(&mut r, m.dim());
            let k = flag_curvature(&m, &w, &u).unwrap();
            assert!((k - expected).abs() < 1e-8, "{}: K = {k}", m.name);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spray_homogeneity_chain(which in 0usize..8, seed in any::<u64>(), lambda in 0.2..5.0f64) {
        let m = &builtins()[which];
        let w = m.sample_tangent(&mut rng(seed));
        let a = spray_coefficients(m, &w).unwrap();
        let b = spray_coefficients(m, &w.scaled(lambda)).unwrap();
        let scale = 1.0 + a.g.amax() + a.n.amax();
        prop_assert!(a.homogeneity_residual() < 1e-10 * scale);
        prop_assert!((&b.g - &a.g * (lambda * lambda)).amax() < 1e-9 * scale * lambda * lambda);
        prop_assert!((&b.n - &a.n * lambda).amax() < 1e-9 * scale * lambda);
        prop_assert!(b.berwald.sub(&a.berwald).max_abs() < 1e-9 * (1.0 + a.berwald.max_abs()));
    }

    #[test]
    fn curvature_kills_the_base_direction_and_is_self_adjoint(which in 0usize..8, seed in any::<u64>()) {
        let m = &builtins()[which];
        let mut r = rng(seed);
        let w = m.sample_tangent(&mut r);
        let rw = curvature_endomorphism(m, &w).unwrap();
        let g = fundamental_tensor(m, &w).unwrap();
        let scale = 1.0 + rw.r.amax();
        prop_assert!(rw.apply(&w.y).amax() < 1e-9 * scale);
        let (a, b) = (random_unit(&mut r, m.dim()), random_unit(&mut r, m.dim()));
        prop_assert!((g.apply(&rw.apply(&a), &b) - g.apply(&a, &rw.apply(&b))).abs() < 1e-9 * scale);
    }

    #[test]
    fn flag_curvature_depends_only_on_the_flag(which in 0usize..8, seed in any::<u64>(), s in 0.1..4.0f64, t in -3.0..3.0f64) {
        let m = &builtins()[which];
        let mut r = rng(seed);
        let w = m.sample_tangent(&mut r);
        let u = random_unit(&mut r, m.dim());
        let k = flag_curvature(m, &w, &u);
        prop_assume!(k.is_ok());
        let k = k.unwrap();
        let k2 = flag_curvature(m, &w, &(&u * s + &w.y * t)).unwrap();
        prop_assert!((k - k2).abs() < 1e-8 * (1.0 + k.abs()), "{k} vs {k2}");
    }

    #[test]
    fn riemannian_curvature_matches_levi_civita(dim in 2usize..4, hyperbolic in any::<bool>(), seed in any::<u64>()) {
        let m = if hyperbolic { MetricSpec::hyperbolic(dim) } else { MetricSpec::sphere(dim) };
        let MetricKind::Riemannian(field) = &m.kind else { unreachable!() };
        let mut r = rng(seed);
        let w = m.sample_tangent(&mut r);
        let ours = curvature_endomorphism(&m, &w).unwrap().r;
        let classical = riemann_operator(field, w.x.as_slice(), &w.y).unwrap();
        prop_assert!((&ours - &classical).amax() < 1e-8 * (1.0 + classical.amax()), "{ours} vs {classical}");
    }
}
