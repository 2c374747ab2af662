//! Independent reference computations shared by the integration tests.
//! Everything here uses plain `f64` evaluation of `F²` and finite
//! differences, never the jet pipeline.
#![allow(dead_code)]

use finsler_core::metric::{MetricSpec, TangentVector};
use finsler_core::sweep::{seeded_rng, SampleRng};
use finsler_core::tensor::{Matrix, Vector};

/// Metrics exercised by the sweeps, all planar except the last two.
pub fn builtins() -> Vec<MetricSpec> {
    vec![
        MetricSpec::euclidean(2),
        MetricSpec::sphere(2),
        MetricSpec::hyperbolic(2),
        MetricSpec::randers_default(),
        MetricSpec::randers_constant(&[0.5, 0.0]),
        MetricSpec::funk(2),
        MetricSpec::funk(3),
        MetricSpec::euclidean(3),
    ]
}

pub fn rng(seed: u64) -> SampleRng {
    seeded_rng(seed)
}

pub fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

pub fn f2(m: &MetricSpec, x: &Vector, y: &Vector) -> f64 {
    m.f2::<f64>(x.as_slice(), y.as_slice())
}

fn unit(n: usize, i: usize) -> Vector {
    let mut e = Vector::zeros(n);
    e[i] = 1.0;
    e
}

/// Central-difference Hessian of `F²/2` in `y`.
pub fn fd_fundamental(m: &MetricSpec, w: &TangentVector, h: f64) -> Matrix {
    let n = w.dim();
    Matrix::from_fn(n, n, |i, j| {
        let (ei, ej) = (unit(n, i) * h, unit(n, j) * h);
        let f = |a: &Vector, b: &Vector| f2(m, &w.x, &(&w.y + a + b));
        0.5 * (f(&ei, &ej) - f(&ei, &-&ej) - f(&-&ei, &ej) + f(&-&ei, &-&ej)) / (4.0 * h * h)
    })
}

/// `¼ ∂³/∂r∂s∂t F²(y + r u + s v + t z)` by nested central differences.
pub fn fd_cartan(m: &MetricSpec, w: &TangentVector, u: &Vector, v: &Vector, z: &Vector, h: f64) -> f64 {
    let mut acc = 0.0;
    for (a, sa) in [(1.0, 1.0), (-1.0, -1.0)] {
        for (b, sb) in [(1.0, 1.0), (-1.0, -1.0)] {
            for (c, sc) in [(1.0, 1.0), (-1.0, -1.0)] {
                let y = &w.y + u * (a * h) + v * (b * h) + z * (c * h);
                acc += sa * sb * sc * f2(m, &w.x, &y);
            }
        }
    }
    0.25 * acc / (8.0 * h * h * h)
}

/// Spray coefficients from the Euler-Lagrange equations of `L = F²/2`.
/// Along a curve through `x` with velocity `y` they read
/// `L_{y^i y^j} ẍ^j + L_{y^i x^k} y^k - L_{x^i} = 0`; solving for `ẍ`
/// gives `G = -ẍ / 2`.
pub fn euler_lagrange_spray(m: &MetricSpec, w: &TangentVector, h: f64) -> Vector {
    let n = w.dim();
    let l = |x: &Vector, y: &Vector| 0.5 * f2(m, x, y);
    let hyy = Matrix::from_fn(n, n, |i, j| {
        let (ei, ej) = (unit(n, i) * h, unit(n, j) * h);
        (l(&w.x, &(&w.y + &ei + &ej)) - l(&w.x, &(&w.y + &ei - &ej)) - l(&w.x, &(&w.y - &ei + &ej))
            + l(&w.x, &(&w.y - &ei - &ej)))
            / (4.0 * h * h)
    });
    let hyx = Matrix::from_fn(n, n, |i, k| {
        let (ei, ek) = (unit(n, i) * h, unit(n, k) * h);
        (l(&(&w.x + &ek), &(&w.y + &ei)) - l(&(&w.x - &ek), &(&w.y + &ei)) - l(&(&w.x + &ek), &(&w.y - &ei))
            + l(&(&w.x - &ek), &(&w.y - &ei)))
            / (4.0 * h * h)
    });
    let lx = Vector::from_fn(n, |i, _| {
        let ei = unit(n, i) * h;
        (l(&(&w.x + &ei), &w.y) - l(&(&w.x - &ei), &w.y)) / (2.0 * h)
    });
    let rhs = lx - hyx * &w.y;
    let acc = hyy.lu().solve(&rhs).expect("Hessian of L is invertible");
    acc * -0.5
}

/// Golden-section minimiser of a unimodal function on `[a, b]`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (b - r * (b - a), a + r * (b - a));
    while (b - a).abs() > tol {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    0.5 * (a + b)
}

/// For a Minkowski norm (straight geodesics), the direction of the shortest
/// segment from the line `p + s d` to the point `q`, normalised to `F = 1`.
pub fn foot_of_perpendicular(m: &MetricSpec, p: &Vector, d: &Vector, q: &Vector) -> Vector {
    let x0 = Vector::zeros(p.len());
    let f = |s: f64| f2(m, &x0, &(q - (p + d * s))).sqrt();
    let s = golden_min(f, -10.0, 10.0, 1e-12);
    let u = q - (p + d * s);
    let fu = f2(m, &x0, &u).sqrt();
    u / fu
}
