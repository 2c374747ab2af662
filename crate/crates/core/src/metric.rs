//! Finsler metrics on a single coordinate chart, the fundamental tensor and
//! the Cartan tensor.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ad::{dot, jet_lift, quad_form, DynRule, Jet, Scalar};
use crate::error::{FinslerError, Result};
use crate::tensor::{guarded_inverse, is_positive_definite, Matrix, Tensor3, Vector};

/// Directions shorter than this are treated as lying on the null section.
pub const NULL_DIRECTION_SCALE: f64 = 1e-12;

/// A point `w = (x, y)` of the slit tangent bundle in chart coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub x: Vector,
    pub y: Vector,
}

impl TangentVector {
    pub fn new(x: Vector, y: Vector) -> Self {
        assert_eq!(x.len(), y.len(), "base point and direction dimensions differ");
        Self { x, y }
    }

    pub fn from_slices(x: &[f64], y: &[f64]) -> Self {
        Self::new(Vector::from_column_slice(x), Vector::from_column_slice(y))
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// `(x, λ y)`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self::new(self.x.clone(), &self.y * lambda)
    }

    /// Chart coordinates of the point of `TM` as one vector `(x, y)`.
    pub fn stacked(&self) -> Vec<f64> {
        self.x.iter().chain(self.y.iter()).copied().collect()
    }
}

/// Riemannian coefficient fields `a_ij(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum RiemannianField {
    Constant(Matrix),
    /// `4 δ_ij / (1 + |x|²)²`: the unit sphere in stereographic coordinates.
    Sphere { dim: usize },
    /// `4 δ_ij / (1 - |x|²)²`: the Poincaré ball model of hyperbolic space.
    Hyperbolic { dim: usize },
}

impl RiemannianField {
    pub fn dim(&self) -> usize {
        match self {
            Self::Constant(m) => m.nrows(),
            Self::Sphere { dim } | Self::Hyperbolic { dim } => *dim,
        }
    }

    /// `a_ij(x) u^i v^j`.
    pub fn pairing<S: Scalar>(&self, x: &[S], u: &[S], v: &[S]) -> S {
        match self {
            Self::Constant(m) => {
                let rows: Vec<Vec<S>> = (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| u[0].constant_like(m[(i, j)])).collect())
                    .collect();
                quad_form(&rows, u, v)
            }
            Self::Sphere { .. } => {
                let denom = dot(x, x) + 1.0;
                dot(u, v) * 4.0 / (denom.clone() * denom)
            }
            Self::Hyperbolic { .. } => {
                let denom = -dot(x, x) + 1.0;
                dot(u, v) * 4.0 / (denom.clone() * denom)
            }
        }
    }

    /// Coefficient matrix at a plain point.
    pub fn matrix(&self, x: &[f64]) -> Matrix {
        match self {
            Self::Constant(m) => m.clone(),
            Self::Sphere { dim } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                Matrix::identity(*dim, *dim) * (4.0 / (1.0 + r2).powi(2))
            }
            Self::Hyperbolic { dim } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                Matrix::identity(*dim, *dim) * (4.0 / (1.0 - r2).powi(2))
            }
        }
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        match self {
            Self::Hyperbolic { .. } => x.iter().map(|v| v * v).sum::<f64>() < 1.0,
            _ => true,
        }
    }
}

/// Affine one-form field `b(x) = b0 + M x` used as the drift of a Randers
/// metric.
#[derive(Debug, Clone, PartialEq)]
pub struct CovectorField {
    pub b0: Vector,
    pub slope: Matrix,
}

impl CovectorField {
    pub fn constant(b0: Vector) -> Self {
        let n = b0.len();
        Self {
            b0,
            slope: Matrix::zeros(n, n),
        }
    }

    pub fn components<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.b0.len();
        (0..n)
            .map(|i| {
                let mut acc = x[0].constant_like(self.b0[i]);
                for (j, xj) in x.iter().enumerate() {
                    let m = self.slope[(i, j)];
                    if m != 0.0 {
                        acc = acc + xj.clone() * m;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn at(&self, x: &[f64]) -> Vector {
        Vector::from_vec(self.components(x))
    }
}

#[derive(Clone)]
pub enum MetricKind {
    Euclidean { dim: usize },
    Riemannian(RiemannianField),
    /// `F = sqrt(a(y, y)) + b(y)`.
    Randers {
        alpha: RiemannianField,
        beta: CovectorField,
    },
    /// Funk metric of the unit ball.
    Funk { dim: usize },
    /// User-supplied `F²` rule; the rule returns a single output.
    Custom { dim: usize, rule: Arc<dyn DynRule> },
}

impl fmt::Debug for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Euclidean { dim } => write!(f, "Euclidean({dim})"),
            Self::Riemannian(r) => write!(f, "Riemannian({r:?})"),
            Self::Randers { alpha, beta } => write!(f, "Randers({alpha:?}, {beta:?})"),
            Self::Funk { dim } => write!(f, "Funk({dim})"),
            Self::Custom { dim, .. } => write!(f, "Custom({dim})"),
        }
    }
}

/// Region of the chart where a metric is defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Whole,
    /// Open ball `|x| < radius` around the origin.
    Ball { radius: f64 },
}

impl Domain {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::Whole => true,
            Domain::Ball { radius } => x.iter().map(|v| v * v).sum::<f64>() < radius * radius,
        }
    }
}

/// A Finsler metric on one chart.
#[derive(Debug, Clone)]
pub struct MetricSpec {
    pub name: String,
    pub kind: MetricKind,
    pub domain: Domain,
    /// Radius of the ball from which random base points are drawn.
    pub sample_radius: f64,
}

impl MetricSpec {
    pub fn euclidean(dim: usize) -> Self {
        Self {
            name: "euclidean".into(),
            kind: MetricKind::Euclidean { dim },
            domain: Domain::Whole,
            sample_radius: 1.0,
        }
    }

    pub fn riemannian(name: &str, field: RiemannianField) -> Self {
        let domain = match field {
            RiemannianField::Hyperbolic { .. } => Domain::Ball { radius: 1.0 },
            _ => Domain::Whole,
        };
        let sample_radius = match field {
            RiemannianField::Hyperbolic { .. } => 0.6,
            _ => 1.0,
        };
        Self {
            name: name.into(),
            kind: MetricKind::Riemannian(field),
            domain,
            sample_radius,
        }
    }

    pub fn sphere(dim: usize) -> Self {
        Self::riemannian("sphere", RiemannianField::Sphere { dim })
    }

    pub fn hyperbolic(dim: usize) -> Self {
        Self::riemannian("hyperbolic", RiemannianField::Hyperbolic { dim })
    }

    pub fn randers(alpha: RiemannianField, beta: CovectorField) -> Self {
        let domain = match alpha {
            RiemannianField::Hyperbolic { .. } => Domain::Ball { radius: 1.0 },
            _ => Domain::Whole,
        };
        Self {
            name: "randers".into(),
            kind: MetricKind::Randers { alpha, beta },
            domain,
            sample_radius: 0.5,
        }
    }

    /// Euclidean `α` with constant drift `b`: a Minkowski norm.
    pub fn randers_constant(b: &[f64]) -> Self {
        let n = b.len();
        let mut m = Self::randers(
            RiemannianField::Constant(Matrix::identity(n, n)),
            CovectorField::constant(Vector::from_column_slice(b)),
        );
        m.name = "randers-constant".into();
        m
    }

    /// Planar Randers metric with a non-closed, position-dependent drift;
    /// neither Berwald nor Landsberg.
    pub fn randers_default() -> Self {
        let beta = CovectorField {
            b0: Vector::from_column_slice(&[0.3, 0.1]),
            slope: Matrix::from_row_slice(2, 2, &[0.1, 0.2, -0.15, 0.05]),
        };
        Self::randers(RiemannianField::Constant(Matrix::identity(2, 2)), beta)
    }

    pub fn funk(dim: usize) -> Self {
        Self {
            name: "funk".into(),
            kind: MetricKind::Funk { dim },
            domain: Domain::Ball { radius: 1.0 },
            sample_radius: 0.5,
        }
    }

    pub fn custom(name: &str, dim: usize, rule: Arc<dyn DynRule>, domain: Domain) -> Self {
        let sample_radius = match domain {
            Domain::Ball { radius } => 0.5 * radius,
            Domain::Whole => 1.0,
        };
        Self {
            name: name.into(),
            kind: MetricKind::Custom { dim, rule },
            domain,
            sample_radius,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            MetricKind::Euclidean { dim } | MetricKind::Funk { dim } => *dim,
            MetricKind::Custom { dim, .. } => *dim,
            MetricKind::Riemannian(r) => r.dim(),
            MetricKind::Randers { alpha, .. } => alpha.dim(),
        }
    }

    pub fn is_riemannian(&self) -> bool {
        matches!(
            self.kind,
            MetricKind::Euclidean { .. } | MetricKind::Riemannian(_)
        )
    }

    /// `F(x, y)²`, written once for every scalar type.
    pub fn f2<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        match &self.kind {
            MetricKind::Euclidean { .. } => dot(y, y),
            MetricKind::Riemannian(field) => field.pairing(x, y, y),
            MetricKind::Randers { alpha, beta } => {
                let a = alpha.pairing(x, y, y).sqrt();
                let b = dot(&beta.components(x), y);
                let f = a + b;
                f.clone() * f
            }
            MetricKind::Funk { .. } => {
                let xy = dot(x, y);
                let yy = dot(y, y);
                let one_minus = -dot(x, x) + 1.0;
                let root = (xy.clone() * xy.clone() + yy * one_minus.clone()).sqrt();
                let f = (root + xy) / one_minus;
                f.clone() * f
            }
            MetricKind::Custom { rule, .. } => S::eval_dyn(rule.as_ref(), x, y)
                .into_iter()
                .next()
                .expect("custom F² rule returned no output"),
        }
    }

    /// Checks that `(x, y)` lies on the slit bundle inside the domain.
    pub fn check_point(&self, x: &[f64], y: &[f64]) -> Result<()> {
        if x.len() != self.dim() || y.len() != self.dim() {
            return Err(FinslerError::Dimension(format!(
                "metric has dimension {}, got x of length {} and y of length {}",
                self.dim(),
                x.len(),
                y.len()
            )));
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < NULL_DIRECTION_SCALE {
            return Err(FinslerError::NullDirection(norm));
        }
        let inside = self.domain.contains(x)
            && match &self.kind {
                MetricKind::Riemannian(f) | MetricKind::Randers { alpha: f, .. } => f.in_domain(x),
                _ => true,
            };
        if !inside {
            return Err(FinslerError::Domain(format!(
                "x = {x:?} is outside the domain of {}",
                self.name
            )));
        }
        Ok(())
    }

    pub fn check(&self, w: &TangentVector) -> Result<()> {
        self.check_point(w.x.as_slice(), w.y.as_slice())
    }

    /// Draws a base point in the sampling ball and a direction with
    /// Euclidean length in `[0.5, 2]`.
    pub fn sample_tangent<R: Rng + ?Sized>(&self, rng: &mut R) -> TangentVector {
        let n = self.dim();
        loop {
            let x: Vec<f64> = (0..n)
                .map(|_| rng.random_range(-self.sample_radius..self.sample_radius))
                .collect();
            if x.iter().map(|v| v * v).sum::<f64>() >= self.sample_radius * self.sample_radius {
                continue;
            }
            let dir = random_unit(rng, n);
            let len = rng.random_range(0.5..2.0);
            let w = TangentVector::new(Vector::from_vec(x), dir * len);
            if self.check(&w).is_ok() {
                return w;
            }
        }
    }
}

/// Uniformly distributed Euclidean unit vector.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vector {
    loop {
        let v = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let norm = v.norm();
        if norm > 1e-3 && norm <= 1.0 {
            return v / norm;
        }
    }
}

/// `F(w)`.
pub fn metric_value(m: &MetricSpec, w: &TangentVector) -> Result<f64> {
    m.check(w)?;
    let f2 = m.f2(w.x.as_slice(), w.y.as_slice());
    if !f2.is_finite() || f2 < 0.0 {
        return Err(FinslerError::Domain(format!("F² = {f2} at {w:?}")));
    }
    Ok(f2.sqrt())
}

/// Jet of `F²` in the `2n` variables `(x, y)` around a tangent vector.
///
/// Variable `i < n` is `x^i`, variable `n + i` is `y^i`.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub at: TangentVector,
    pub jet: Jet,
    n: usize,
}

impl MetricJet {
    pub fn new(m: &MetricSpec, w: &TangentVector, order: usize) -> Result<Self> {
        m.check(w)?;
        let n = m.dim();
        let center = w.stacked();
        let jet = jet_lift(|v| m.f2(&v[..n], &v[n..]), &center, order)?;
        Ok(Self {
            at: w.clone(),
            jet,
            n,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.jet.order()
    }

    pub fn f2(&self) -> f64 {
        self.jet.value()
    }

    /// Partial derivative of `F²` along `xs` (x-variables) and `ys`
    /// (y-variables).
    pub fn d(&self, xs: &[usize], ys: &[usize]) -> f64 {
        let vars: Vec<usize> = xs.iter().copied().chain(ys.iter().map(|&i| self.n + i)).collect();
        self.jet.derivative(&vars).expect("derivative within jet order")
    }

    /// `g_ij = ½ ∂²F²/∂y^i∂y^j`.
    pub fn fundamental(&self) -> Matrix {
        let n = self.n;
        Matrix::from_fn(n, n, |i, j| 0.5 * self.d(&[], &[i, j]))
    }

    /// `C_ijk = ¼ ∂³F²/∂y^i∂y^j∂y^k`.
    pub fn cartan(&self) -> Tensor3 {
        Tensor3::from_fn(self.n, |i, j, k| 0.25 * self.d(&[], &[i, j, k]))
    }

    /// `[i][j][k] = ∂g_ij/∂x^k`.
    pub fn fundamental_dx(&self) -> Tensor3 {
        Tensor3::from_fn(self.n, |i, j, k| 0.5 * self.d(&[k], &[i, j]))
    }

    /// `½ ∂F²/∂y`, the Legendre covector `g_w(w, ·)`.
    pub fn legendre(&self) -> Vector {
        Vector::from_fn(self.n, |i, _| 0.5 * self.d(&[], &[i]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalTensor {
    pub at: TangentVector,
    pub g: Matrix,
}

impl FundamentalTensor {
    pub fn apply(&self, u: &Vector, v: &Vector) -> f64 {
        u.dot(&(&self.g * v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartanTensor {
    pub at: TangentVector,
    pub c: Tensor3,
}

impl CartanTensor {
    pub fn apply(&self, u: &Vector, v: &Vector, z: &Vector) -> f64 {
        self.c.trilinear(u, v, z)
    }
}

fn checked_fundamental(mj: &MetricJet) -> Result<Matrix> {
    let g = mj.fundamental();
    if !is_positive_definite(&g) {
        return Err(FinslerError::NotPositiveDefinite {
            x: mj.at.x.iter().copied().collect(),
            y: mj.at.y.iter().copied().collect(),
        });
    }
    Ok(g)
}

pub fn fundamental_tensor(m: &MetricSpec, w: &TangentVector) -> Result<FundamentalTensor> {
    let mj = MetricJet::new(m, w, 2)?;
    Ok(FundamentalTensor {
        at: w.clone(),
        g: checked_fundamental(&mj)?,
    })
}

pub fn cartan_tensor(m: &MetricSpec, w: &TangentVector) -> Result<CartanTensor> {
    let mj = MetricJet::new(m, w, 3)?;
    checked_fundamental(&mj)?;
    Ok(CartanTensor {
        at: w.clone(),
        c: mj.cartan(),
    })
}

/// Fundamental tensor, its inverse and the point it was evaluated at.
pub(crate) fn fundamental_with_inverse(mj: &MetricJet) -> Result<(Matrix, Matrix)> {
    let g = checked_fundamental(mj)?;
    let ginv = guarded_inverse(&g)?;
    Ok((g, ginv))
}

/// Outcome of [`check_metric`]; failures are collected, not raised.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub samples: usize,
    /// Max of `|F(x, λy) - λF(x, y)| / max(1, λF)` over `λ ∈ {0.5, 2, 7}`.
    pub homogeneity_residual: f64,
    /// Max of `|F(w)² - g_w(w, w)|`.
    pub identity_residual: f64,
    /// Base points where the fundamental tensor failed Cholesky.
    pub not_positive_definite: Vec<(Vec<f64>, Vec<f64>)>,
    /// Evaluation errors other than positive-definiteness.
    pub errors: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.not_positive_definite.is_empty()
            && self.errors.is_empty()
            && self.homogeneity_residual <= tol
            && self.identity_residual <= tol
    }
}

/// Samples random admissible points and reports homogeneity,
/// positive-definiteness and the `F² = g_w(w, w)` identity.
pub fn check_metric(m: &MetricSpec, samples: usize, seed: u64) -> ValidationReport {
    let results = crate::sweep::map_seeded(samples, seed, |rng| {
        let w = m.sample_tangent(rng);
        check_one(m, &w)
    });
    let mut report = ValidationReport {
        samples,
        ..Default::default()
    };
    for r in results {
        match r {
            Ok((hom, ident)) => {
                report.homogeneity_residual = report.homogeneity_residual.max(hom);
                report.identity_residual = report.identity_residual.max(ident);
            }
            Err(FinslerError::NotPositiveDefinite { x, y }) => {
                report.not_positive_definite.push((x, y))
            }
            Err(e) => report.errors.push(e.to_string()),
        }
    }
    report
}

fn check_one(m: &MetricSpec, w: &TangentVector) -> Result<(f64, f64)> {
    let f = metric_value(m, w)?;
    let mut hom: f64 = 0.0;
    for lambda in [0.5, 2.0, 7.0] {
        let fl = metric_value(m, &w.scaled(lambda))?;
        hom = hom.max((fl - lambda * f).abs() / (lambda * f).max(1.0));
    }
    let g = fundamental_tensor(m, w)?;
    let ident = (f * f - g.apply(&w.y, &w.y)).abs();
    Ok((hom, ident))
}
