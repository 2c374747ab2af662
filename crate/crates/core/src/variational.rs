//! Geodesics, the exponential map, the energy functional, Jacobi fields,
//! parallel transport and the second variation of energy.

use std::sync::Arc;

use crate::connections::{classical_lift, ClassicalKind};
use crate::curve::{same_grid, simpson, uniform_grid, Curve, FieldAlongCurve};
use crate::error::{FinslerError, Result};
use crate::metric::{fundamental_tensor, metric_value, MetricSpec, TangentVector};
use crate::ode::{integrate, OdeOptions};
use crate::spray::{spray_coefficients, Spray, SprayData};
use crate::submanifold::{sff_connection, NormalVector, Submanifold};
use crate::tensor::{Matrix, Vector};

/// Output nodes used when a caller does not supply a grid.
pub const DEFAULT_NODES: usize = 401;

fn state(parts: &[&Vector]) -> Vector {
    Vector::from_iterator(
        parts.iter().map(|p| p.len()).sum(),
        parts.iter().flat_map(|p| p.iter().copied()),
    )
}

fn block(z: &Vector, i: usize, n: usize) -> Vector {
    z.rows(i * n, n).into_owned()
}

/// `ẍ = -2G(x, ẋ)` integrated on `grid` from `w0` at `grid[0]`.
pub fn integrate_geodesic_on(s: &dyn Spray, w0: &TangentVector, grid: &[f64], opts: &OdeOptions) -> Result<Curve> {
    s.check_point(w0.x.as_slice(), w0.y.as_slice())?;
    let n = s.dim();
    let rhs = |_t: f64, z: &Vector| -> Result<Vector> {
        let (x, y) = (block(z, 0, n), block(z, 1, n));
        let g = s.spray_value(x.as_slice(), y.as_slice())?;
        Ok(state(&[&y, &(g * -2.0)]))
    };
    let states = integrate(rhs, &state(&[&w0.x, &w0.y]), grid, opts)?;
    let (points, velocities) = states.iter().map(|z| (block(z, 0, n), block(z, 1, n))).unzip();
    Curve::new(grid.to_vec(), points, velocities)
}

/// Geodesic on `[0, t_end]` sampled at [`DEFAULT_NODES`] nodes, with local
/// relative tolerance `tol`.
pub fn integrate_geodesic(s: &dyn Spray, w0: &TangentVector, t_end: f64, tol: f64) -> Result<Curve> {
    if !(tol > 0.0) {
        return Err(FinslerError::Domain(format!("tolerance must be positive, got {tol}")));
    }
    integrate_geodesic_on(s, w0, &uniform_grid(0.0, t_end, DEFAULT_NODES), &OdeOptions::with_tolerance(tol))
}

/// `γ_{(x0, v)}(t)`.
pub fn exponential_map(s: &dyn Spray, x0: &Vector, v: &Vector, t: f64) -> Result<Vector> {
    let w0 = TangentVector::new(x0.clone(), v.clone());
    s.check_point(w0.x.as_slice(), w0.y.as_slice())?;
    if t == 0.0 {
        return Ok(x0.clone());
    }
    let c = integrate_geodesic_on(s, &w0, &[0.0, t], &OdeOptions::default())?;
    Ok(c.points[1].clone())
}

/// Nodes at which energy quadrature is carried out for `c`.
fn quadrature_curve(c: &Curve) -> Curve {
    let n = c.len();
    let h = (c.grid[n - 1] - c.grid[0]) / (n - 1) as f64;
    let uniform = c.grid.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs());
    if uniform && n % 2 == 1 && n >= DEFAULT_NODES {
        c.clone()
    } else {
        c.resample(DEFAULT_NODES.max(n | 1))
    }
}

/// `E(λ) = ½ ∫ F(λ̇)² dt` by composite Simpson quadrature.
pub fn energy(m: &MetricSpec, c: &Curve) -> Result<f64> {
    if let Some(i) = c.first_null_velocity() {
        return Err(FinslerError::NullDirection(c.velocities[i].norm()));
    }
    let q = quadrature_curve(c);
    let values = q
        .points
        .iter()
        .zip(&q.velocities)
        .map(|(x, v)| {
            let f = metric_value(m, &TangentVector::new(x.clone(), v.clone()))?;
            Ok(0.5 * f * f)
        })
        .collect::<Result<Vec<_>>>()?;
    simpson(&q.grid, &values)
}

/// Curvature evaluator used by the Jacobi integrator.
pub type CurvatureModel<'a> = &'a (dyn Fn(&SprayData) -> Matrix + Sync);

fn standard_curvature(sd: &SprayData) -> Matrix {
    sd.curvature_matrix()
}

fn check_is_geodesic(geo: &Curve, integrated: &[Vector]) -> Result<()> {
    let scale = geo.points.iter().map(|p| p.amax()).fold(1.0, f64::max);
    let dev = geo
        .points
        .iter()
        .zip(integrated)
        .map(|(a, b)| (a - b).amax())
        .fold(0.0, f64::max);
    if dev > 1e-6 * scale {
        return Err(FinslerError::Domain(format!(
            "curve is not a geodesic of the spray (deviation {dev:e})"
        )));
    }
    Ok(())
}

/// Jacobi field along the geodesic `geo` with `J(0) = j0` and
/// `(D J/dt)(0) = k0`.
///
/// The system `J̇ = K - N J`, `K̇ = -R J - N K` is integrated together with
/// the geodesic on the curve's grid, with `R` and `N` taken fresh from the
/// spray jets at every stage.
pub fn jacobi_integrate(s: &dyn Spray, geo: &Curve, j0: &Vector, k0: &Vector) -> Result<FieldAlongCurve> {
    jacobi_integrate_with(s, geo, j0, k0, &standard_curvature)
}

pub fn jacobi_integrate_with(
    s: &dyn Spray,
    geo: &Curve,
    j0: &Vector,
    k0: &Vector,
    curvature: CurvatureModel<'_>,
) -> Result<FieldAlongCurve> {
    let n = s.dim();
    let rhs = |_t: f64, z: &Vector| -> Result<Vector> {
        let (x, y, j, k) = (block(z, 0, n), block(z, 1, n), block(z, 2, n), block(z, 3, n));
        let sd = spray_coefficients(s, &TangentVector::new(x, y.clone()))?;
        let r = curvature(&sd);
        let jd = &k - &sd.n * &j;
        let kd = -(&r * &j) - &sd.n * &k;
        Ok(state(&[&y, &(&sd.g * -2.0), &jd, &kd]))
    };
    let z0 = state(&[&geo.points[0], &geo.velocities[0], j0, k0]);
    let states = integrate(rhs, &z0, &geo.grid, &OdeOptions::default())?;
    let xs: Vec<Vector> = states.iter().map(|z| block(z, 0, n)).collect();
    check_is_geodesic(geo, &xs)?;
    FieldAlongCurve::new(geo.grid.clone(), states.iter().map(|z| block(z, 2, n)).collect())
}

/// `(exp(x0, y0 + h u, t) - exp(x0, y0 - h u, t)) / 2h`: the Jacobi field
/// of the geodesic variation with `J(0) = 0`, `(DJ/dt)(0) = u`.
pub fn jacobi_variation_oracle(s: &dyn Spray, w0: &TangentVector, u: &Vector, t: f64, h: f64) -> Result<Vector> {
    let plus = exponential_map(s, &w0.x, &(&w0.y + u * h), t)?;
    let minus = exponential_map(s, &w0.x, &(&w0.y - u * h), t)?;
    Ok((plus - minus) / (2.0 * h))
}

/// The same oracle evaluated on a whole grid.
pub fn jacobi_variation_field(
    s: &dyn Spray,
    w0: &TangentVector,
    u: &Vector,
    grid: &[f64],
    h: f64,
) -> Result<FieldAlongCurve> {
    let opts = OdeOptions::default();
    let plus = integrate_geodesic_on(s, &TangentVector::new(w0.x.clone(), &w0.y + u * h), grid, &opts)?;
    let minus = integrate_geodesic_on(s, &TangentVector::new(w0.x.clone(), &w0.y - u * h), grid, &opts)?;
    let values = plus
        .points
        .iter()
        .zip(&minus.points)
        .map(|(p, m)| (p - m) / (2.0 * h))
        .collect();
    FieldAlongCurve::new(grid.to_vec(), values)
}

/// Solves `D^λ̇ V/dt = 0`, that is `V̇ = -N V`, along the geodesic `geo`.
pub fn parallel_transport(s: &dyn Spray, geo: &Curve, v0: &Vector) -> Result<FieldAlongCurve> {
    let n = s.dim();
    let rhs = |_t: f64, z: &Vector| -> Result<Vector> {
        let (x, y, v) = (block(z, 0, n), block(z, 1, n), block(z, 2, n));
        let (g, nl) = s.spray_first_order(&TangentVector::new(x, y.clone()))?;
        Ok(state(&[&y, &(g * -2.0), &-(nl * v)]))
    };
    let z0 = state(&[&geo.points[0], &geo.velocities[0], v0]);
    let states = integrate(rhs, &z0, &geo.grid, &OdeOptions::default())?;
    let xs: Vec<Vector> = states.iter().map(|z| block(z, 0, n)).collect();
    check_is_geodesic(geo, &xs)?;
    FieldAlongCurve::new(geo.grid.clone(), states.iter().map(|z| block(z, 2, n)).collect())
}

/// Endpoint constraint of a variational problem: the curve must end on
/// `manifold` at parameter `param`.
#[derive(Debug, Clone, Copy)]
pub struct Endpoint<'a> {
    pub manifold: &'a Submanifold,
    pub param: &'a Vector,
}

/// Largest accepted `|V|` at an unconstrained endpoint and deviation from
/// tangency at a constrained one.
pub const ENDPOINT_TOLERANCE: f64 = 1e-6;

fn boundary_term(m: &MetricSpec, end: Option<Endpoint<'_>>, x: &Vector, velocity: &Vector, v: &Vector) -> Result<f64> {
    let Some(ep) = end else {
        if v.amax() > ENDPOINT_TOLERANCE {
            return Err(FinslerError::Domain(format!(
                "variation field does not vanish at a fixed endpoint (|V| = {:e})",
                v.amax()
            )));
        }
        return Ok(0.0);
    };
    let p = ep.manifold;
    let base = p.point(ep.param);
    if (&base - x).amax() > ENDPOINT_TOLERANCE {
        return Err(FinslerError::Domain("curve endpoint does not lie on its end manifold".into()));
    }
    let eta = NormalVector::checked(p, ep.param, m, velocity.clone(), ENDPOINT_TOLERANCE)?;
    let u = p.tangent_coordinates(ep.param, v)?;
    sff_connection(p, &eta, &u, &u, m, &classical_lift(ClassicalKind::Berwald))
}

/// `∫ g(DV, DV) - g(R V, V) dt + h^{P2}(V(1), V(1)) - h^{P1}(V(0), V(0))`.
pub fn second_variation_formula(
    m: &MetricSpec,
    geo: &Curve,
    v: &FieldAlongCurve,
    p1: Option<Endpoint<'_>>,
    p2: Option<Endpoint<'_>>,
) -> Result<f64> {
    same_grid(&geo.grid, &v.grid)?;
    let vdot = v.derivative()?;
    let integrand = (0..geo.len())
        .map(|i| {
            let w = TangentVector::new(geo.points[i].clone(), geo.velocities[i].clone());
            let sd = spray_coefficients(m, &w)?;
            let g = fundamental_tensor(m, &w)?.g;
            let vi = &v.values[i];
            let dv = &vdot.values[i] + &sd.n * vi;
            let rv = sd.curvature_matrix() * vi;
            Ok(dv.dot(&(&g * &dv)) - rv.dot(&(&g * vi)))
        })
        .collect::<Result<Vec<_>>>()?;
    let bulk = simpson(&geo.grid, &integrand)?;
    let last = geo.len() - 1;
    let h_end = boundary_term(m, p2, &geo.points[last], &geo.velocities[last], &v.values[last])?;
    let h_start = boundary_term(m, p1, &geo.points[0], &geo.velocities[0], &v.values[0])?;
    Ok(bulk + h_end - h_start)
}

type FamilyRule = Arc<dyn Fn(f64, usize) -> (Vector, Vector) + Send + Sync>;

/// A one-parameter family of curves `s ↦ λ_s`, sampled on a fixed grid.
#[derive(Clone)]
pub struct VariationFamily {
    pub eps: f64,
    pub grid: Vec<f64>,
    rule: FamilyRule,
}

impl std::fmt::Debug for VariationFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "VariationFamily(eps = {}, {} nodes)", self.eps, self.grid.len())
    }
}

impl VariationFamily {
    /// `rule(s, t)` returns the point and the `t`-velocity of `λ_s(t)`.
    pub fn new<F>(eps: f64, grid: Vec<f64>, rule: F) -> Self
    where
        F: Fn(f64, f64) -> (Vector, Vector) + Send + Sync + 'static,
    {
        let g = grid.clone();
        Self {
            eps,
            grid,
            rule: Arc::new(move |s, i| rule(s, g[i])),
        }
    }

    /// `λ_s = λ + s V` in chart coordinates, with `V̇` from grid differences.
    pub fn linear(eps: f64, curve: &Curve, v: &FieldAlongCurve) -> Result<Self> {
        same_grid(&curve.grid, &v.grid)?;
        let vdot = v.derivative()?;
        let (p, dp, vv, dv) = (curve.points.clone(), curve.velocities.clone(), v.values.clone(), vdot.values);
        Ok(Self {
            eps,
            grid: curve.grid.clone(),
            rule: Arc::new(move |s, i| (&p[i] + &vv[i] * s, &dp[i] + &dv[i] * s)),
        })
    }

    pub fn curve(&self, s: f64) -> Result<Curve> {
        if s.abs() > self.eps {
            return Err(FinslerError::Domain(format!("s = {s} outside [-{0}, {0}]", self.eps)));
        }
        let (points, velocities) = (0..self.grid.len()).map(|i| (self.rule)(s, i)).unzip();
        Curve::new(self.grid.clone(), points, velocities)
    }
}

/// Fourth-order central difference of `s ↦ E(λ_s)` at `s = 0`.
pub fn variation_energy_derivatives(m: &MetricSpec, fam: &VariationFamily, order: u8, h: f64) -> Result<f64> {
    let e = |s: f64| -> Result<f64> {
        let c = fam.curve(s)?;
        if let Some(i) = c.first_null_velocity() {
            return Err(FinslerError::NullDirection(c.velocities[i].norm()));
        }
        let values = c
            .points
            .iter()
            .zip(&c.velocities)
            .map(|(x, v)| {
                let f = metric_value(m, &TangentVector::new(x.clone(), v.clone()))?;
                Ok(0.5 * f * f)
            })
            .collect::<Result<Vec<_>>>()?;
        simpson(&c.grid, &values)
    };
    match order {
        1 => Ok((-e(2.0 * h)? + 8.0 * e(h)? - 8.0 * e(-h)? + e(-2.0 * h)?) / (12.0 * h)),
        2 => Ok((-e(2.0 * h)? + 16.0 * e(h)? - 30.0 * e(0.0)? + 16.0 * e(-h)? - e(-2.0 * h)?) / (12.0 * h * h)),
        _ => Err(FinslerError::Domain(format!("derivative order must be 1 or 2, got {order}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v2(a: f64, b: f64) -> Vector {
        Vector::from_column_slice(&[a, b])
    }

    #[test]
    fn euclidean_geodesic_is_straight() {
        let e = MetricSpec::euclidean(2);
        let c = integrate_geodesic(&e, &TangentVector::from_slices(&[0.0, 0.0], &[1.0, 0.0]), 1.0, 1e-9).unwrap();
        assert!((c.points.last().unwrap() - v2(1.0, 0.0)).amax() < 1e-12);
    }

    #[test]
    fn exponential_map_basics() {
        let e = MetricSpec::euclidean(2);
        let x0 = v2(0.5, -0.5);
        let v = v2(1.0, 2.0);
        assert!((exponential_map(&e, &x0, &v, 0.7).unwrap() - (&x0 + &v * 0.7)).amax() < 1e-12);
        let r = MetricSpec::randers_default();
        assert_eq!(exponential_map(&r, &x0, &v, 0.0).unwrap(), x0);
    }

    #[test]
    fn energy_of_segments() {
        let e = MetricSpec::euclidean(2);
        let line = Curve::from_fn(0.0, 1.0, 401, |t| v2(t, 0.0), |_| v2(1.0, 0.0)).unwrap();
        assert!((energy(&e, &line).unwrap() - 0.5).abs() < 1e-14);
        // x(t) = t² covers the same segment at non-constant speed
        let quad = Curve::from_fn(0.0, 1.0, 401, |t| v2(t * t, 0.0), |t| v2(2.0 * t, 0.0));
        let err = energy(&e, &quad.unwrap());
        assert!(matches!(err, Err(FinslerError::NullDirection(_))));
        let quad = Curve::from_fn(0.0, 1.0, 401, |t| v2(t * t + t, 0.0) / 2.0, |t| v2(2.0 * t + 1.0, 0.0) / 2.0);
        assert!(energy(&e, &quad.unwrap()).unwrap() > 0.5 + 1e-3);
    }

    #[test]
    fn euclidean_jacobi_is_affine() {
        let e = MetricSpec::euclidean(2);
        let geo = integrate_geodesic(&e, &TangentVector::from_slices(&[0.0, 0.0], &[1.0, 0.5]), 1.0, 1e-9).unwrap();
        let j = jacobi_integrate(&e, &geo, &v2(0.1, 0.2), &v2(-1.0, 1.0)).unwrap();
        for (t, v) in j.grid.iter().zip(&j.values) {
            assert!((v - (v2(0.1, 0.2) + v2(-1.0, 1.0) * *t)).amax() < 1e-12);
        }
        let o = jacobi_variation_oracle(&e, &geo_start(&geo), &v2(0.3, 0.1), 0.8, 1e-3).unwrap();
        assert!((o - v2(0.24, 0.08)).amax() < 1e-12);
    }

    fn geo_start(c: &Curve) -> TangentVector {
        TangentVector::new(c.points[0].clone(), c.velocities[0].clone())
    }

    #[test]
    fn euclidean_transport_is_constant() {
        let e = MetricSpec::euclidean(2);
        let geo = integrate_geodesic(&e, &TangentVector::from_slices(&[0.0, 0.0], &[1.0, 0.5]), 1.0, 1e-9).unwrap();
        let v = parallel_transport(&e, &geo, &v2(0.3, 0.4)).unwrap();
        assert!(v.values.iter().all(|x| (x - v2(0.3, 0.4)).amax() < 1e-14));
    }

    #[test]
    fn jacobi_rejects_non_geodesic() {
        let e = MetricSpec::euclidean(2);
        let bent = Curve::from_fn(0.0, 1.0, 101, |t| v2(t, t * t), |t| v2(1.0, 2.0 * t)).unwrap();
        assert!(jacobi_integrate(&e, &bent, &v2(0.0, 0.0), &v2(0.0, 1.0)).is_err());
    }

    #[test]
    fn fixed_endpoint_field_must_vanish() {
        let e = MetricSpec::euclidean(2);
        let geo = integrate_geodesic(&e, &TangentVector::from_slices(&[0.0, 0.0], &[1.0, 0.0]), 1.0, 1e-9).unwrap();
        let v = FieldAlongCurve::from_fn(&geo.grid, |_| v2(0.0, 1.0)).unwrap();
        assert!(second_variation_formula(&e, &geo, &v, None, None).is_err());
    }
}
