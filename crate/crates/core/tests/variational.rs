mod common;

use std::f64::consts::PI;

use common::{rng, v};
use finsler_core::curve::{uniform_grid, Curve, FieldAlongCurve};
use finsler_core::metric::{fundamental_tensor, random_unit, MetricSpec, TangentVector};
use finsler_core::ode::OdeOptions;
use finsler_core::variational::{
    energy, exponential_map, integrate_geodesic, integrate_geodesic_on, jacobi_integrate, jacobi_variation_field,
    parallel_transport, second_variation_formula, variation_energy_derivatives, VariationFamily,
};
use proptest::prelude::*;

fn g_at(m: &MetricSpec, c: &Curve, i: usize) -> finsler_core::metric::FundamentalTensor {
    fundamental_tensor(m, &TangentVector::new(c.points[i].clone(), c.velocities[i].clone())).unwrap()
}

#[test]
fn sphere_radial_geodesic_and_energy() {
    // x(t) = tan(s t) on the stereographic sphere, with constant speed 2s.
    let m = MetricSpec::sphere(2);
    let s = 0.6;
    let end = exponential_map(&m, &v(&[0.0, 0.0]), &v(&[s, 0.0]), 1.0).unwrap();
    assert!((end - v(&[s.tan(), 0.0])).amax() < 1e-9);
    let geo = integrate_geodesic(&m, &TangentVector::from_slices(&[0.0, 0.0], &[s, 0.0]), 1.0, 1e-10).unwrap();
    assert!((energy(&m, &geo).unwrap() - 2.0 * s * s).abs() < 1e-9);
}

#[test]
fn sphere_jacobi_field_has_sine_profile() {
    let m = MetricSpec::sphere(2);
    let s = 0.7;
    let geo = integrate_geodesic(&m, &TangentVector::from_slices(&[0.0, 0.0], &[s, 0.0]), 1.0, 1e-10).unwrap();
    let j = jacobi_integrate(&m, &geo, &v(&[0.0, 0.0]), &v(&[0.0, 1.0])).unwrap();
    for i in (0..geo.len()).step_by(40) {
        let t = geo.grid[i];
        let g = g_at(&m, &geo, i);
        let norm = g.apply(&j.values[i], &j.values[i]).sqrt();
        let expected = 2.0 * (2.0 * s * t).sin() / (2.0 * s);
        assert!((norm - expected).abs() < 1e-7, "t = {t}: {norm} vs {expected}");
    }
}

#[test]
fn jacobi_field_matches_geodesic_variation() {
    let mut r = rng(41);
    for m in [MetricSpec::randers_default(), MetricSpec::funk(2), MetricSpec::hyperbolic(2)] {
        let w = m.sample_tangent(&mut r).scaled(0.5);
        let u = random_unit(&mut r, 2);
        let grid = uniform_grid(0.0, 1.0, 51);
        let geo = integrate_geodesic_on(&m, &w, &grid, &OdeOptions::default()).unwrap();
        let j = jacobi_integrate(&m, &geo, &v(&[0.0, 0.0]), &u).unwrap();
        let oracle = jacobi_variation_field(&m, &w, &u, &grid, 1e-4).unwrap();
        assert!(j.distance(&oracle).unwrap() < 1e-6, "{}", m.name);
    }
}

#[test]
fn transport_preserves_metric_quantities() {
    let sphere = MetricSpec::sphere(2);
    let geo = integrate_geodesic(&sphere, &TangentVector::from_slices(&[0.2, -0.1], &[0.5, 0.8]), 1.0, 1e-10).unwrap();
    let e = parallel_transport(&sphere, &geo, &v(&[0.3, -0.4])).unwrap();
    let first = g_at(&sphere, &geo, 0).apply(&e.values[0], &e.values[0]);
    for i in 0..geo.len() {
        assert!((g_at(&sphere, &geo, i).apply(&e.values[i], &e.values[i]) - first).abs() < 1e-8);
    }

    // Along a Finsler geodesic only the pairing with the velocity survives.
    let randers = MetricSpec::randers_default();
    let geo = integrate_geodesic(&randers, &TangentVector::from_slices(&[0.1, 0.1], &[0.6, -0.3]), 1.0, 1e-10).unwrap();
    let e = parallel_transport(&randers, &geo, &v(&[0.2, 0.9])).unwrap();
    let pairing = |i: usize| g_at(&randers, &geo, i).apply(&geo.velocities[i], &e.values[i]);
    for i in 0..geo.len() {
        assert!((pairing(i) - pairing(0)).abs() < 1e-8);
    }
}

#[test]
fn funk_geodesics_through_the_centre_are_rays() {
    let m = MetricSpec::funk(2);
    let mut r = rng(42);
    for _ in 0..5 {
        let d = random_unit(&mut r, 2);
        let geo = integrate_geodesic(&m, &TangentVector::new(v(&[0.0, 0.0]), &d * 0.5), 1.0, 1e-10).unwrap();
        for p in &geo.points {
            assert!((p[0] * d[1] - p[1] * d[0]).abs() < 1e-10);
            assert!(p.dot(&d) >= 0.0 && p.norm() < 1.0);
        }
    }
}

#[test]
fn euclidean_bump_family() {
    let m = MetricSpec::euclidean(2);
    let grid = uniform_grid(0.0, 1.0, 401);
    let fam = VariationFamily::new(0.1, grid.clone(), |s, t| {
        (v(&[t, s * (PI * t).sin()]), v(&[1.0, s * PI * (PI * t).cos()]))
    });
    let first = variation_energy_derivatives(&m, &fam, 1, 1e-3).unwrap();
    let second = variation_energy_derivatives(&m, &fam, 2, 1e-3).unwrap();
    assert!(first.abs() < 1e-10);
    assert!((second - PI * PI / 2.0).abs() < 1e-6);

    let geo = fam.curve(0.0).unwrap();
    let field = FieldAlongCurve::from_fn(&grid, |t| v(&[0.0, (PI * t).sin()])).unwrap();
    let formula = second_variation_formula(&m, &geo, &field, None, None).unwrap();
    assert!((formula - PI * PI / 2.0).abs() < 1e-4);
}

#[test]
fn sphere_second_variation_formula_and_energy_agree() {
    let m = MetricSpec::sphere(2);
    let grid = uniform_grid(0.0, 1.0, 401);
    let geo = integrate_geodesic_on(&m, &TangentVector::from_slices(&[0.0, 0.0], &[PI / 4.0, 0.0]), &grid, &OdeOptions::default())
        .unwrap();
    let e = parallel_transport(&m, &geo, &v(&[0.0, 0.5])).unwrap();
    let field =
        FieldAlongCurve::new(grid.clone(), grid.iter().zip(&e.values).map(|(t, ei)| ei * (PI * t).sin()).collect()).unwrap();
    let formula = second_variation_formula(&m, &geo, &field, None, None).unwrap();
    let fam = VariationFamily::linear(0.05, &geo, &field).unwrap();
    let fd = variation_energy_derivatives(&m, &fam, 2, 1e-2).unwrap();
    let exact = 3.0 * PI * PI / 8.0;
    assert!((formula - exact).abs() < 1e-3 * exact, "{formula}");
    assert!((fd - exact).abs() < 1e-3 * exact, "{fd}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn exponential_map_rescales_time(seed in any::<u64>(), lambda in 0.3..1.5f64) {
        let m = MetricSpec::randers_default();
        let w = m.sample_tangent(&mut rng(seed));
        let a = exponential_map(&m, &w.x, &(&w.y * lambda), 0.5).unwrap();
        let b = exponential_map(&m, &w.x, &w.y, 0.5 * lambda).unwrap();
        prop_assert!((a - b).amax() < 1e-8);
    }

    #[test]
    fn geodesic_speed_is_constant(seed in any::<u64>(), funk in any::<bool>()) {
        let m = if funk { MetricSpec::funk(2) } else { MetricSpec::randers_default() };
        let w = m.sample_tangent(&mut rng(seed)).scaled(0.5);
        let geo = integrate_geodesic(&m, &w, 1.0, 1e-10).unwrap();
        let f = |i: usize| finsler_core::metric::metric_value(&m, &TangentVector::new(geo.points[i].clone(), geo.velocities[i].clone())).unwrap();
        let f0 = f(0);
        for i in 0..geo.len() {
            prop_assert!((f(i) - f0).abs() < 1e-8 * f0);
        }
    }
}
