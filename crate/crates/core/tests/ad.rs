mod common;

use approx::assert_abs_diff_eq;
use finsler_core::ad::{jet_lift, Jet, JetSpace, Scalar};
use finsler_core::FinslerError;
use proptest::prelude::*;

#[test]
fn polynomial_hessian() {
    let j = jet_lift(|x: &[Jet]| x[0].clone() * x[0].clone() * x[1].clone(), &[1.0, 2.0], 2).unwrap();
    assert_eq!(j.derivative(&[0, 0]).unwrap(), 4.0);
    assert_eq!(j.derivative(&[0, 1]).unwrap(), 2.0);
    assert_eq!(j.derivative(&[1, 1]).unwrap(), 0.0);
}

#[test]
fn linear_gradient() {
    let j = jet_lift(|x: &[Jet]| x[0].clone() + x[1].clone(), &[-3.2, 0.7], 1).unwrap();
    assert_eq!(j.partial(&[1, 0]).unwrap(), 1.0);
    assert_eq!(j.partial(&[0, 1]).unwrap(), 1.0);
}

#[test]
fn norm_hessian_matches_central_differences() {
    let f = |x: f64, y: f64| (x * x + y * y).sqrt();
    let j = jet_lift(|v: &[Jet]| (v[0].clone() * v[0].clone() + v[1].clone() * v[1].clone()).sqrt(), &[3.0, 4.0], 2)
        .unwrap();
    let h = 1e-4;
    let (x, y) = (3.0, 4.0);
    let fxx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
    let fyy = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h);
    let fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h);
    assert_abs_diff_eq!(j.derivative(&[0, 0]).unwrap(), fxx, epsilon = 1e-6);
    assert_abs_diff_eq!(j.derivative(&[1, 1]).unwrap(), fyy, epsilon = 1e-6);
    assert_abs_diff_eq!(j.derivative(&[0, 1]).unwrap(), fxy, epsilon = 1e-6);
}

#[test]
fn partial_examples() {
    let square = jet_lift(|x: &[Jet]| x[0].clone() * x[0].clone(), &[3.0], 2).unwrap();
    assert_eq!(square.partial(&[2]).unwrap(), 2.0);

    let space = JetSpace::get(1, 2);
    assert_eq!(Jet::constant(&space, 7.0).partial(&[1]).unwrap(), 0.0);

    let j = jet_lift(|v: &[Jet]| v[0].exp() * v[1].clone(), &[0.0, 1.0], 2).unwrap();
    assert_abs_diff_eq!(j.partial(&[1, 1]).unwrap(), 1.0, epsilon = 1e-15);
}

#[test]
fn over_order_partial_is_an_index_error() {
    let j = jet_lift(|x: &[Jet]| x[0].clone() * x[1].clone(), &[1.0, 1.0], 2).unwrap();
    assert!(matches!(j.partial(&[2, 1]), Err(FinslerError::Index(_))));
    assert!(matches!(jet_lift(|x: &[Jet]| x[0].clone(), &[1.0], 5), Err(FinslerError::Index(_))));
}

#[test]
fn singular_center_is_a_domain_error() {
    let r = jet_lift(|x: &[Jet]| x[0].sqrt(), &[-1.0], 2);
    assert!(matches!(r, Err(FinslerError::Domain(_))));
}

/// A monomial `c · Π x_i^{e_i}`.
#[derive(Debug, Clone)]
struct Monomial {
    c: f64,
    e: Vec<u8>,
}

fn binomial(n: u8, k: u8) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Taylor coefficient of the polynomial at `center` for multi-index `alpha`.
fn taylor_coeff(poly: &[Monomial], center: &[f64], alpha: &[u8]) -> f64 {
    poly.iter()
        .map(|m| {
            m.e.iter().zip(alpha).zip(center).fold(m.c, |acc, ((&e, &a), &c)| {
                if a > e {
                    0.0
                } else {
                    acc * binomial(e, a) * c.powi(i32::from(e - a))
                }
            })
        })
        .sum()
}

fn polynomial() -> impl Strategy<Value = (Vec<Monomial>, Vec<f64>)> {
    (1usize..=4).prop_flat_map(|nv| {
        let mono = (-2.0..2.0f64, prop::collection::vec(0u8..=4, nv)).prop_filter_map("degree <= 4", |(c, e)| {
            (e.iter().map(|&d| u32::from(d)).sum::<u32>() <= 4).then_some(Monomial { c, e })
        });
        (prop::collection::vec(mono, 1..6), prop::collection::vec(-1.5..1.5f64, nv))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn polynomial_jets_are_exact((poly, center) in polynomial()) {
        let jet = jet_lift(
            |x: &[Jet]| {
                poly.iter().fold(x[0].constant_like(0.0), |acc, m| {
                    let term = m.e.iter().zip(x).fold(x[0].constant_like(m.c), |t, (&e, xi)| t * xi.powi(i32::from(e)));
                    acc + term
                })
            },
            &center,
            4,
        ).unwrap();
        for alpha in jet.space().monomials() {
            let expect = taylor_coeff(&poly, &center, alpha);
            prop_assert!((jet.coeff(alpha).unwrap() - expect).abs() < 1e-12 * (1.0 + expect.abs()), "alpha {alpha:?}");
        }
    }

    #[test]
    fn mixed_partials_commute(a in -1.0..1.0f64, b in 0.2..1.5f64, c in -1.0..1.0f64) {
        let f = |x: &[Jet]| (x[0].sin() * x[1].ln() + x[2].clone() * x[0].exp()).sqrt() + x[1].powf(1.5) * x[2].cos();
        let j = jet_lift(f, &[a, b, c + 3.0], 4).unwrap();
        for (p, q, r) in [(0usize, 1usize, 2usize), (1, 1, 0), (2, 0, 0)] {
            let one = j.differentiate(p).differentiate(q).differentiate(r).value();
            let two = j.differentiate(r).differentiate(q).differentiate(p).value();
            let three = j.differentiate(q).differentiate(r).differentiate(p).value();
            prop_assert!((one - two).abs() < 1e-9 && (one - three).abs() < 1e-9);
        }
    }

    #[test]
    fn metric_partials_match_finite_differences(which in 0usize..8, seed in any::<u64>()) {
        let m = &common::builtins()[which];
        let w = m.sample_tangent(&mut common::rng(seed));
        let n = w.dim();
        let center = w.stacked();
        let jet = jet_lift(|v: &[Jet]| m.f2(&v[..n], &v[n..]), &center, 3).unwrap();
        let h = 1e-4;
        let shifted = |d: &[(usize, f64)]| {
            let mut c = center.clone();
            for &(i, s) in d {
                c[i] += s;
            }
            m.f2::<f64>(&c[..n], &c[n..])
        };
        // second order from values, third order from differences of exact second order
        for i in 0..2 * n {
            for k in 0..2 * n {
                let fd = (shifted(&[(i, h), (k, h)]) - shifted(&[(i, h), (k, -h)]) - shifted(&[(i, -h), (k, h)])
                    + shifted(&[(i, -h), (k, -h)])) / (4.0 * h * h);
                let exact = jet.derivative(&[i, k]).unwrap();
                prop_assert!((fd - exact).abs() < 1e-5 * (1.0 + exact.abs()), "d{i}d{k}: {fd} vs {exact}");
                for l in 0..2 * n {
                    let second = |s: f64| {
                        let mut c = center.clone();
                        c[l] += s;
                        jet_lift(|v: &[Jet]| m.f2(&v[..n], &v[n..]), &c, 2).unwrap().derivative(&[i, k]).unwrap()
                    };
                    let fd3 = (second(h) - second(-h)) / (2.0 * h);
                    let exact3 = jet.derivative(&[i, k, l]).unwrap();
                    prop_assert!((fd3 - exact3).abs() < 1e-5 * (1.0 + exact3.abs()), "d{i}d{k}d{l}: {fd3} vs {exact3}");
                }
            }
        }
    }
}
