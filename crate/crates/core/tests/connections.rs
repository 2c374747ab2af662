mod common;

use common::{rng, v};
use finsler_core::ad::Jet;
use finsler_core::connections::{
    classical_lift, constant_section, covariant_derivative_curve, lift_curvature, nabla_apply, random_lift,
    torsion, check_conditions, ClassicalKind, Condition, LiftSpec, RandomLiftOptions,
};
use finsler_core::curve::{uniform_grid, Curve, FieldAlongCurve};
use finsler_core::geometry::{cprime_tensor, PointGeometry};
use finsler_core::metric::{cartan_tensor, random_unit, MetricKind, MetricSpec, TangentVector};
use finsler_core::oracle::levi_civita;
use finsler_core::spray::{curvature_endomorphism, horizontal_lift};
use finsler_core::tensor::Vector;
use finsler_core::variational::{integrate_geodesic_on, parallel_transport};
use finsler_core::ode::OdeOptions;
use proptest::prelude::*;

fn lifts_with_t1(n: usize, seed: u64) -> Vec<LiftSpec> {
    let mut out: Vec<LiftSpec> = ClassicalKind::ALL.into_iter().map(classical_lift).collect();
    out.push(random_lift(n, seed, RandomLiftOptions { t1: true, metric_compatible: false }));
    out
}

/// Rate of change of `C(U, V, Z)` along the geodesic through `w`, with
/// `U, V, Z` transported by the Berwald rule; fourth-order one-sided stencil.
fn cartan_rate_along_geodesic(m: &MetricSpec, w: &TangentVector, u: &Vector, a: &Vector, b: &Vector) -> f64 {
    let h = 1e-2;
    let grid = uniform_grid(0.0, 4.0 * h, 5);
    let opts = OdeOptions::with_tolerance(1e-12);
    let geo = integrate_geodesic_on(m, w, &grid, &opts).unwrap();
    let fields: Vec<FieldAlongCurve> = [u, a, b].iter().map(|s| parallel_transport(m, &geo, s).unwrap()).collect();
    let values: Vec<f64> = (0..5)
        .map(|i| {
            let at = TangentVector::new(geo.points[i].clone(), geo.velocities[i].clone());
            cartan_tensor(m, &at).unwrap().apply(&fields[0].values[i], &fields[1].values[i], &fields[2].values[i])
        })
        .collect();
    (-25.0 * values[0] + 48.0 * values[1] - 36.0 * values[2] + 16.0 * values[3] - 3.0 * values[4]) / (12.0 * h)
}

#[test]
fn cprime_is_the_transported_cartan_rate() {
    let mut r = rng(31);
    for m in [MetricSpec::randers_default(), MetricSpec::funk(2), MetricSpec::funk(3)] {
        for _ in 0..4 {
            let w = m.sample_tangent(&mut r);
            let n = m.dim();
            let (u, a, b) = (random_unit(&mut r, n), random_unit(&mut r, n), random_unit(&mut r, n));
            let exact = cprime_tensor(&m, &w).unwrap().apply(&u, &a, &b);
            let rate = cartan_rate_along_geodesic(&m, &w, &u, &a, &b);
            assert!((exact + rate).abs() < 1e-6 * (1.0 + rate.abs()), "{}: {exact} vs -{rate}", m.name);
        }
    }
}

#[test]
fn cprime_vanishes_for_minkowski_norms() {
    let m = MetricSpec::randers_constant(&[0.4, -0.3]);
    let mut r = rng(32);
    for _ in 0..10 {
        let w = m.sample_tangent(&mut r);
        assert!(cprime_tensor(&m, &w).unwrap().cp.max_abs() < 1e-12);
    }
}

#[test]
fn spray_derivative_of_a_lifted_field() {
    // ∇_S 𝒥Y = y^j ∂_j Y + N Y for a field Y on the base.
    let m = MetricSpec::randers_default();
    let mut r = rng(33);
    let y_field = |x: &[f64]| v(&[x[0] * x[1] + 2.0, x[0].sin() - x[1] * x[1]]);
    for _ in 0..5 {
        let w = m.sample_tangent(&mut r);
        let geo = PointGeometry::of_metric(&m, &w).unwrap();
        let vars = Jet::variables(&w.stacked(), 1);
        let section = vec![
            vars[0].clone() * vars[1].clone() + 2.0,
            vars[0].sin() - vars[1].clone() * vars[1].clone(),
        ];
        let h = 1e-5;
        let xp: Vec<f64> = w.x.iter().zip(&w.y).map(|(x, y)| x + h * y).collect();
        let xm: Vec<f64> = w.x.iter().zip(&w.y).map(|(x, y)| x - h * y).collect();
        let directional = (y_field(&xp) - y_field(&xm)) / (2.0 * h);
        let expected = directional + &geo.spray.n * y_field(w.x.as_slice());
        for lift in lifts_with_t1(2, 4) {
            let got = nabla_apply(&lift, &geo, &geo.spray.spray_vector(), &section).unwrap();
            assert!((&got - &expected).amax() < 1e-8, "{}: {got} vs {expected}", lift.name);
        }
    }
}

#[test]
fn torsion_of_coordinate_fields() {
    // Constant raw fields commute, so T(X, Y) = ∇_X 𝒥Y - ∇_Y 𝒥X.
    let m = MetricSpec::funk(2);
    let mut r = rng(34);
    let w = m.sample_tangent(&mut r);
    let geo = PointGeometry::of_metric(&m, &w).unwrap();
    let x = v(&[0.3, -1.0, 0.7, 0.2]);
    let y = v(&[1.1, 0.4, -0.5, 0.9]);
    let jx = constant_section(&w, &v(&[0.3, -1.0]));
    let jy = constant_section(&w, &v(&[1.1, 0.4]));
    for lift in lifts_with_t1(2, 9) {
        let t = torsion(&lift, &geo, &x, &y).unwrap();
        let by_hand = nabla_apply(&lift, &geo, &x, &jy).unwrap() - nabla_apply(&lift, &geo, &y, &jx).unwrap();
        assert!((&t - &by_hand).amax() < 1e-12, "{}", lift.name);
    }
    let berwald = classical_lift(ClassicalKind::Berwald);
    assert!(torsion(&berwald, &geo, &x, &y).unwrap().amax() < 1e-12);
}

#[test]
fn riemannian_covariant_derivative_is_levi_civita() {
    let m = MetricSpec::sphere(2);
    let MetricKind::Riemannian(field) = &m.kind else { unreachable!() };
    let grid = uniform_grid(0.0, 1.0, 201);
    let curve = Curve::from_fn(0.0, 1.0, 201, |t| v(&[0.3 * t, 0.5 * t * t - 0.2]), |t| v(&[0.3, t])).unwrap();
    let vf = FieldAlongCurve::from_fn(&grid, |t| v(&[t.cos(), 1.0 + t * t])).unwrap();
    let wf = FieldAlongCurve::from_fn(&grid, |t| v(&[1.0, t])).unwrap();
    for kind in ClassicalKind::ALL {
        let d = covariant_derivative_curve(&classical_lift(kind), &m, &curve, &wf, &vf).unwrap();
        for i in (10..190).step_by(30) {
            let t = grid[i];
            let lc = levi_civita(field, curve.points[i].as_slice()).unwrap();
            let expected = v(&[-t.sin(), 2.0 * t]) + lc.gamma.contract_last_two(&curve.velocities[i], &vf.values[i]);
            assert!((&d.values[i] - &expected).amax() < 1e-6, "{kind} at t = {t}");
        }
    }
}

#[test]
fn euclidean_covariant_derivative_is_plain_derivative() {
    let m = MetricSpec::euclidean(2);
    let grid = uniform_grid(0.0, 1.0, 101);
    let curve = Curve::from_fn(0.0, 1.0, 101, |t| v(&[t, 2.0 * t]), |_| v(&[1.0, 2.0])).unwrap();
    let vf = FieldAlongCurve::from_fn(&grid, |t| v(&[t * t, 1.0])).unwrap();
    let d = covariant_derivative_curve(&classical_lift(ClassicalKind::Cartan), &m, &curve, &curve.velocity_field(), &vf)
        .unwrap();
    for (t, dv) in grid.iter().zip(&d.values) {
        assert!((dv - v(&[2.0 * t, 0.0])).amax() < 1e-8);
    }
}

#[test]
fn classical_lifts_characterising_conditions() {
    let m = MetricSpec::randers_default();
    let holds = |kind: ClassicalKind| -> Vec<Condition> {
        let report = check_conditions(&classical_lift(kind), &m, &Condition::ALL, 20, 7);
        Condition::ALL.into_iter().filter(|&c| report.holds(c, 1e-7)).collect()
    };
    use Condition::*;
    assert_eq!(holds(ClassicalKind::Berwald), vec![T1, T2, T3, M1, M2, M5, M7]);
    assert_eq!(holds(ClassicalKind::Cartan), vec![T1, T2, M1, M2, M6, M7]);
    assert_eq!(holds(ClassicalKind::ChernRund), vec![T1, T2, T3, M1, M2, M3, M7]);
    assert_eq!(holds(ClassicalKind::Hashiguchi), vec![T1, T2, M1, M2, M4, M7]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lift_curvature_is_the_spray_curvature(seed in any::<u64>(), lift_seed in any::<u64>(), funk in any::<bool>()) {
        let m = if funk { MetricSpec::funk(2) } else { MetricSpec::randers_default() };
        let mut r = rng(seed);
        let w = m.sample_tangent(&mut r);
        let geo = PointGeometry::of_metric(&m, &w).unwrap();
        let u = random_unit(&mut r, 2);
        let xi = random_unit(&mut r, 2);
        let expected = curvature_endomorphism(&m, &w).unwrap().apply(&u);
        for lift in lifts_with_t1(2, lift_seed) {
            let got = lift_curvature(&lift, &geo, &u, Some(&xi)).unwrap();
            prop_assert!((&got - &expected).amax() < 1e-9 * (1.0 + expected.amax()), "{}", lift.name);
        }
    }

    #[test]
    fn horizontal_lifts_are_killed_by_the_vertical_part(seed in any::<u64>()) {
        let m = MetricSpec::randers_default();
        let mut r = rng(seed);
        let w = m.sample_tangent(&mut r);
        let geo = PointGeometry::of_metric(&m, &w).unwrap();
        let u = random_unit(&mut r, 2);
        let hu = horizontal_lift(&geo.spray, &u);
        let s = constant_section(&w, &random_unit(&mut r, 2));
        // on a horizontal direction only the horizontal coefficients act
        let berwald = nabla_apply(&classical_lift(ClassicalKind::Berwald), &geo, &hu, &s).unwrap();
        let hashiguchi = nabla_apply(&classical_lift(ClassicalKind::Hashiguchi), &geo, &hu, &s).unwrap();
        prop_assert!((berwald - hashiguchi).amax() < 1e-12);
    }
}
