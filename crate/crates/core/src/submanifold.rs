//! Immersed submanifolds, Finslerian normal cones, the second fundamental
//! form computed two ways, the symplectic form `ω_F` and the Legendre
//! transform.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ad::{Jet, Scalar};
use crate::connections::{condition_residual, Condition, LiftCoefficients, LiftSpec};
use crate::error::{FinslerError, Result};
use crate::geometry::PointGeometry;
use crate::metric::{fundamental_tensor, metric_value, MetricJet, MetricSpec, TangentVector};
use crate::spray::{spray_coefficients, split, vertical_projector};
use crate::tensor::{guarded_inverse, Matrix, Vector};

/// Newton iteration cap for normal-cone and Legendre solves.
pub const MAX_NEWTON_ITERATIONS: usize = 50;

/// Residual of `g_η(η, T_x P)` accepted after a normal-cone solve.
pub const NORMALITY_TOLERANCE: f64 = 1e-10;

/// Residual of M1 and M2 accepted before a lift is used for the second
/// fundamental form.
pub const METRIC_CONDITION_TOLERANCE: f64 = 1e-7;

pub type ImmersionRule = Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>;

#[derive(Clone)]
pub enum Immersion {
    /// `t ↦ point + t dir`.
    Line { point: Vector, dir: Vector },
    /// `(s, t) ↦ point + s u + t v`.
    Plane { point: Vector, u: Vector, v: Vector },
    /// `θ ↦ center + r (cos θ, sin θ)` in the plane.
    Circle { center: Vector, radius: f64 },
    /// `(θ, φ) ↦ center + r (sin θ cos φ, sin θ sin φ, cos θ)` in space.
    Sphere { center: Vector, radius: f64 },
    /// `t ↦ (t, Σ c_k t^k)` in the plane.
    Graph { coeffs: Vec<f64> },
    Custom { param_dim: usize, dim: usize, rule: ImmersionRule },
}

impl fmt::Debug for Immersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Immersion::Line { point, dir } => write!(f, "Line({point:?}, {dir:?})"),
            Immersion::Plane { point, .. } => write!(f, "Plane({point:?})"),
            Immersion::Circle { center, radius } => write!(f, "Circle({center:?}, {radius})"),
            Immersion::Sphere { center, radius } => write!(f, "Sphere({center:?}, {radius})"),
            Immersion::Graph { coeffs } => write!(f, "Graph({coeffs:?})"),
            Immersion::Custom { param_dim, dim, .. } => write!(f, "Custom({param_dim} -> {dim})"),
        }
    }
}

/// An immersed submanifold of the chart.
#[derive(Debug, Clone)]
pub struct Submanifold {
    pub name: String,
    pub immersion: Immersion,
}

fn offset<S: Scalar>(c: &Vector, parts: Vec<S>) -> Vec<S> {
    parts.into_iter().zip(c.iter()).map(|(p, &ci)| p + ci).collect()
}

impl Submanifold {
    pub fn line(point: &[f64], dir: &[f64]) -> Self {
        Self {
            name: "line".into(),
            immersion: Immersion::Line {
                point: Vector::from_column_slice(point),
                dir: Vector::from_column_slice(dir),
            },
        }
    }

    pub fn plane(point: &[f64], u: &[f64], v: &[f64]) -> Self {
        Self {
            name: "plane".into(),
            immersion: Immersion::Plane {
                point: Vector::from_column_slice(point),
                u: Vector::from_column_slice(u),
                v: Vector::from_column_slice(v),
            },
        }
    }

    pub fn circle(center: &[f64], radius: f64) -> Self {
        Self {
            name: "circle".into(),
            immersion: Immersion::Circle {
                center: Vector::from_column_slice(center),
                radius,
            },
        }
    }

    pub fn sphere(center: &[f64], radius: f64) -> Self {
        Self {
            name: "sphere".into(),
            immersion: Immersion::Sphere {
                center: Vector::from_column_slice(center),
                radius,
            },
        }
    }

    pub fn graph(coeffs: &[f64]) -> Self {
        Self {
            name: "graph".into(),
            immersion: Immersion::Graph { coeffs: coeffs.to_vec() },
        }
    }

    pub fn param_dim(&self) -> usize {
        match &self.immersion {
            Immersion::Line { .. } | Immersion::Circle { .. } | Immersion::Graph { .. } => 1,
            Immersion::Plane { .. } | Immersion::Sphere { .. } => 2,
            Immersion::Custom { param_dim, .. } => *param_dim,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.immersion {
            Immersion::Line { point, .. } | Immersion::Plane { point, .. } => point.len(),
            Immersion::Circle { .. } | Immersion::Graph { .. } => 2,
            Immersion::Sphere { .. } => 3,
            Immersion::Custom { dim, .. } => *dim,
        }
    }

    fn eval<S: Scalar>(&self, p: &[S]) -> Vec<S> {
        match &self.immersion {
            Immersion::Line { point, dir } => {
                offset(point, dir.iter().map(|&d| p[0].clone() * d).collect())
            }
            Immersion::Plane { point, u, v } => offset(
                point,
                u.iter()
                    .zip(v.iter())
                    .map(|(&a, &b)| p[0].clone() * a + p[1].clone() * b)
                    .collect(),
            ),
            Immersion::Circle { center, radius } => {
                offset(center, vec![p[0].cos() * *radius, p[0].sin() * *radius])
            }
            Immersion::Sphere { center, radius } => {
                let (st, ct) = (p[0].sin(), p[0].cos());
                offset(
                    center,
                    vec![
                        st.clone() * p[1].cos() * *radius,
                        st * p[1].sin() * *radius,
                        ct * *radius,
                    ],
                )
            }
            Immersion::Graph { coeffs } => {
                let t = p[0].clone();
                let mut f = t.constant_like(0.0);
                for &c in coeffs.iter().rev() {
                    f = f * t.clone() + c;
                }
                vec![t, f]
            }
            Immersion::Custom { .. } => unreachable!("custom immersions are evaluated on jets"),
        }
    }

    fn jets(&self, p: &Vector) -> Vec<Jet> {
        let vars = Jet::variables(p.as_slice(), 2);
        match &self.immersion {
            Immersion::Custom { rule, .. } => rule(&vars),
            _ => self.eval(&vars),
        }
    }

    pub fn point(&self, p: &Vector) -> Vector {
        let jets = self.jets(p);
        Vector::from_iterator(jets.len(), jets.iter().map(|j| j.value()))
    }

    /// `n x k` matrix of `∂_a φ`.
    pub fn jacobian(&self, p: &Vector) -> Matrix {
        let jets = self.jets(p);
        Matrix::from_fn(jets.len(), self.param_dim(), |i, a| {
            jets[i].derivative(&[a]).expect("second-order immersion jet")
        })
    }

    /// `∂²φ(u, v)`.
    pub fn second_derivative(&self, p: &Vector, u: &Vector, v: &Vector) -> Vector {
        let jets = self.jets(p);
        let k = self.param_dim();
        Vector::from_iterator(
            jets.len(),
            jets.iter().map(|j| {
                let mut acc = 0.0;
                for a in 0..k {
                    for b in 0..k {
                        acc += u[a] * v[b] * j.derivative(&[a, b]).expect("second-order immersion jet");
                    }
                }
                acc
            }),
        )
    }

    /// Coordinates `u` with `dφ(u) = v`; fails when `v` is not tangent.
    pub fn tangent_coordinates(&self, p: &Vector, v: &Vector) -> Result<Vector> {
        let t = self.jacobian(p);
        let gram = t.transpose() * &t;
        let inv = guarded_inverse(&gram).map_err(|e| FinslerError::SingularBasis(e.to_string()))?;
        let u = inv * t.transpose() * v;
        let miss = (&t * &u - v).amax();
        if miss > 1e-6 * (1.0 + v.amax()) {
            return Err(FinslerError::Domain(format!(
                "vector is not tangent to the submanifold (residual {miss:e})"
            )));
        }
        Ok(u)
    }
}

/// A normal direction to a submanifold at a parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalVector {
    pub param: Vector,
    pub point: Vector,
    pub eta: Vector,
}

impl NormalVector {
    /// Wraps `eta`, failing with [`FinslerError::NormalityViolation`] when
    /// the normality residual exceeds `tol`.
    pub fn checked(p: &Submanifold, param: &Vector, m: &MetricSpec, eta: Vector, tol: f64) -> Result<Self> {
        let point = p.point(param);
        let res = normality_residual(p, param, m, &eta)?;
        if res > tol {
            return Err(FinslerError::NormalityViolation(res));
        }
        Ok(Self {
            param: param.clone(),
            point,
            eta,
        })
    }

    pub fn tangent(&self) -> TangentVector {
        TangentVector::new(self.point.clone(), self.eta.clone())
    }
}

/// `max_a |g_η(η, ∂_a φ)| / (F(η) |∂_a φ|)`.
pub fn normality_residual(p: &Submanifold, param: &Vector, m: &MetricSpec, eta: &Vector) -> Result<f64> {
    let w = TangentVector::new(p.point(param), eta.clone());
    let ell = legendre_transform(m, &w)?;
    let f = metric_value(m, &w)?;
    let t = p.jacobian(param);
    Ok((0..t.ncols())
        .map(|a| (ell.dot(&t.column(a)) / (f * t.column(a).norm())).abs())
        .fold(0.0, f64::max))
}

/// Newton iteration for `g_η(η, ∂_a φ) = 0` over `η = guess + Σ c_a ∂_a φ`,
/// normalised to `F(η) = 1`.
pub fn normal_cone_solve(p: &Submanifold, param: &Vector, m: &MetricSpec, guess: &Vector) -> Result<NormalVector> {
    let x = p.point(param);
    let t = p.jacobian(param);
    let mut eta = guess.clone();
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let w = TangentVector::new(x.clone(), eta.clone());
        let no_conv = |residual| FinslerError::NoConvergence {
            iterations: MAX_NEWTON_ITERATIONS,
            residual,
        };
        let mj = MetricJet::new(m, &w, 2).map_err(|_| no_conv(residual))?;
        let g = mj.fundamental();
        let r = t.transpose() * mj.legendre();
        let f = mj.f2().sqrt();
        residual = r.amax() / f.max(f64::MIN_POSITIVE);
        if residual < 1e-14 {
            let eta = eta / f;
            return NormalVector::checked(p, param, m, eta, NORMALITY_TOLERANCE);
        }
        let jac = t.transpose() * &g * &t;
        let step = guarded_inverse(&jac).map_err(|_| no_conv(residual))? * r;
        eta -= &t * step;
    }
    Err(FinslerError::NoConvergence {
        iterations: MAX_NEWTON_ITERATIONS,
        residual,
    })
}

/// `½ g_η(η, D^η_U V + D^η_V U)` with `U, V` the coordinate extensions of
/// `u, v` along the immersion.
pub fn sff_connection(
    p: &Submanifold,
    eta: &NormalVector,
    u: &Vector,
    v: &Vector,
    m: &MetricSpec,
    lift: &LiftSpec,
) -> Result<f64> {
    let geo = PointGeometry::of_metric(m, &eta.tangent())?;
    let coeffs = LiftCoefficients::new(lift, &geo)?;
    for cond in [Condition::M1, Condition::M2] {
        let r = condition_residual(cond, &coeffs, &geo)?;
        if r > METRIC_CONDITION_TOLERANCE {
            return Err(FinslerError::InvalidLift(format!(
                "{} violates {cond} at η (residual {r:e})",
                lift.name
            )));
        }
    }
    let t = p.jacobian(&eta.param);
    let (uu, vv) = (&t * u, &t * v);
    let a = &coeffs.horizontal;
    let d_uv = p.second_derivative(&eta.param, u, v) + a.contract_last_two(&uu, &vv);
    let d_vu = p.second_derivative(&eta.param, v, u) + a.contract_last_two(&vv, &uu);
    let g = &geo.metric()?.g;
    Ok(0.5 * eta.eta.dot(&(g * (d_uv + d_vu))))
}

/// `g_η(η, D^η_U V)` without symmetrisation.
pub fn sff_connection_unsymmetrized(
    p: &Submanifold,
    eta: &NormalVector,
    u: &Vector,
    v: &Vector,
    m: &MetricSpec,
    lift: &LiftSpec,
) -> Result<f64> {
    let geo = PointGeometry::of_metric(m, &eta.tangent())?;
    let coeffs = LiftCoefficients::new(lift, &geo)?;
    let t = p.jacobian(&eta.param);
    let d_uv = p.second_derivative(&eta.param, u, v) + coeffs.horizontal.contract_last_two(&(&t * u), &(&t * v));
    Ok(eta.eta.dot(&(&geo.metric()?.g * d_uv)))
}

/// `ω_F(X1, X2) = g_w(u1, v2) - g_w(v1, u2)` where `(u, v)` is the split
/// `(dπ X, i_w⁻¹ 𝒱 X)` of a raw vector.
pub fn omega_f(m: &MetricSpec, w: &TangentVector, x1: &Vector, x2: &Vector) -> Result<f64> {
    let sd = spray_coefficients(m, w)?;
    let g = fundamental_tensor(m, w)?.g;
    Ok(omega_split(&g, &sd.n, x1, x2))
}

pub(crate) fn omega_split(g: &Matrix, n: &Matrix, x1: &Vector, x2: &Vector) -> f64 {
    let (u1, b1) = split(x1);
    let (u2, b2) = split(x2);
    let v1 = b1 + n * &u1;
    let v2 = b2 + n * &u2;
    u1.dot(&(g * v2)) - v1.dot(&(g * u2))
}

/// `ℒ(w) = g_w(w, ·)`.
pub fn legendre_transform(m: &MetricSpec, w: &TangentVector) -> Result<Vector> {
    Ok(MetricJet::new(m, w, 1)?.legendre())
}

/// Solves `ℒ(x, y) = p` for `y` by damped Newton iteration.
pub fn legendre_inverse(m: &MetricSpec, x: &Vector, p: &Vector, guess: Option<&Vector>) -> Result<TangentVector> {
    let mut y = guess.cloned().unwrap_or_else(|| p.clone());
    let mut residual = f64::INFINITY;
    let scale = 1.0 + p.amax();
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let w = TangentVector::new(x.clone(), y.clone());
        let mj = MetricJet::new(m, &w, 2)?;
        let r = mj.legendre() - p;
        residual = r.amax();
        if residual < 1e-14 * scale {
            return Ok(w);
        }
        let step = guarded_inverse(&mj.fundamental())? * r;
        let mut lambda = 1.0;
        loop {
            let trial = &y - &step * lambda;
            let tw = TangentVector::new(x.clone(), trial.clone());
            if let Ok(tj) = MetricJet::new(m, &tw, 1) {
                if (tj.legendre() - p).amax() < residual || lambda < 1e-4 {
                    y = trial;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-8 {
                return Err(FinslerError::NoConvergence {
                    iterations: MAX_NEWTON_ITERATIONS,
                    residual,
                });
            }
        }
    }
    Err(FinslerError::NoConvergence {
        iterations: MAX_NEWTON_ITERATIONS,
        residual,
    })
}

/// Basis of `T_η ν(P)` in raw `(∂x, ∂y)` components: `k` vectors obtained
/// by re-solving the normal along each parameter direction (central
/// differences with step `h`), then `n - k` fiber vectors `(0, ξ)` spanning
/// the `g_η`-orthogonal complement of `T_x P`, the first being `η` itself.
pub fn normal_bundle_tangent_basis(p: &Submanifold, eta: &NormalVector, m: &MetricSpec, h: f64) -> Result<Vec<Vector>> {
    let n = p.dim();
    let k = p.param_dim();
    let t = p.jacobian(&eta.param);
    let f0 = metric_value(m, &eta.tangent())?;
    let mut basis = Vec::with_capacity(n);
    for a in 0..k {
        let shifted = |sgn: f64| -> Result<Vector> {
            let mut q = eta.param.clone();
            q[a] += sgn * h;
            Ok(normal_cone_solve(p, &q, m, &eta.eta)?.eta * f0)
        };
        let deta = (shifted(1.0)? - shifted(-1.0)?) / (2.0 * h);
        let mut v = Vector::zeros(2 * n);
        v.rows_mut(0, n).copy_from(&t.column(a));
        v.rows_mut(n, n).copy_from(&deta);
        basis.push(v);
    }
    let g = fundamental_tensor(m, &eta.tangent())?.g;
    for xi in fiber_directions(&g, &t, &eta.eta)? {
        let mut v = Vector::zeros(2 * n);
        v.rows_mut(n, n).copy_from(&xi);
        basis.push(v);
    }
    Ok(basis)
}

/// `g`-orthonormal completion of `η` inside `{ξ : g(ξ, T) = 0}`.
fn fiber_directions(g: &Matrix, t: &Matrix, eta: &Vector) -> Result<Vec<Vector>> {
    let n = g.nrows();
    let ip = |a: &Vector, b: &Vector| a.dot(&(g * b));
    let constraint = t.transpose() * g;
    let ginv = guarded_inverse(g)?;
    let gram = &constraint * &ginv * constraint.transpose();
    let gram_inv = guarded_inverse(&gram).map_err(|e| FinslerError::SingularBasis(e.to_string()))?;
    let mut out = vec![eta / ip(eta, eta).sqrt()];
    for i in 0..n {
        if out.len() == n - t.ncols() {
            break;
        }
        let mut e = Vector::zeros(n);
        e[i] = 1.0;
        // project onto the kernel of the constraint in the g-inner product
        let lam = &gram_inv * (&constraint * &e);
        let mut xi = &e - &ginv * constraint.transpose() * lam;
        for b in &out {
            xi -= b * ip(b, &xi);
        }
        let norm = ip(&xi, &xi).sqrt();
        if norm > 1e-6 {
            out.push(xi / norm);
        }
    }
    if out.len() != n - t.ncols() {
        return Err(FinslerError::SingularBasis("fiber directions are degenerate".into()));
    }
    Ok(out)
}

/// `b_η(u, v) = -g_η(v_full, dφ v)`, where `(dφ u, v_full)` is the split of
/// the tangent vector of `ν(P)` lying over `dφ u`.
pub fn sff_symplectic(p: &Submanifold, eta: &NormalVector, u: &Vector, v: &Vector, m: &MetricSpec, h: f64) -> Result<f64> {
    let n = p.dim();
    let k = p.param_dim();
    let basis = normal_bundle_tangent_basis(p, eta, m, h)?;
    let w = eta.tangent();
    let sd = spray_coefficients(m, &w)?;
    let g = fundamental_tensor(m, &w)?.g;
    // first components of the parameter vectors; fiber vectors have none
    let first = Matrix::from_fn(n, k, |i, a| basis[a][i]);
    let target = p.jacobian(&eta.param) * u;
    let gram = first.transpose() * &first;
    let coeff = guarded_inverse(&gram).map_err(|e| FinslerError::SingularBasis(e.to_string()))?
        * first.transpose()
        * &target;
    if (&first * &coeff - &target).amax() > 1e-9 * (1.0 + target.amax()) {
        return Err(FinslerError::SingularBasis("first components do not span the tangent space".into()));
    }
    let x = (0..k).fold(Vector::zeros(2 * n), |acc, a| acc + &basis[a] * coeff[a]);
    let v_full = vertical_projector(&sd, &x);
    Ok(-v_full.dot(&(&g * (p.jacobian(&eta.param) * v))))
}

/// Largest `|ω_F(b_i, b_j)|` over a basis.
pub fn lagrangian_residual(m: &MetricSpec, eta: &NormalVector, basis: &[Vector]) -> Result<f64> {
    let w = eta.tangent();
    let sd = spray_coefficients(m, &w)?;
    let g = fundamental_tensor(m, &w)?.g;
    let mut worst: f64 = 0.0;
    for (i, a) in basis.iter().enumerate() {
        for b in &basis[i + 1..] {
            worst = worst.max(omega_split(&g, &sd.n, a, b).abs());
        }
    }
    Ok(worst)
}
