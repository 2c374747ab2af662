//! Geodesic sprays, the canonical nonlinear connection, the horizontal and
//! vertical split, Berwald coefficients and the curvature endomorphism.
//!
//! A spray is `S = y^i ∂/∂x^i - 2 G^i(x, y) ∂/∂y^i` with `G` positively
//! 2-homogeneous in `y`. The canonical connection has coefficients
//! `N^i_j = ∂G^i/∂y^j`, its horizontal frame is `δ_j = ∂_{x^j} - N^i_j ∂_{y^i}`.

use std::fmt;
use std::sync::Arc;

use crate::ad::{solve_jets, DynRule, Jet, JetSpace};
use crate::error::{FinslerError, Result};
use crate::metric::{MetricJet, MetricSpec, TangentVector, NULL_DIRECTION_SCALE};
use crate::tensor::{guarded_inverse, Matrix, Tensor3, Vector};

/// Anything that supplies spray coefficients on a chart: the geodesic spray
/// of a metric or a bare spray rule.
pub trait Spray: Send + Sync {
    fn dim(&self) -> usize;

    fn name(&self) -> &str;

    fn check_point(&self, x: &[f64], y: &[f64]) -> Result<()>;

    /// `G^i` as jets of the given order (at most 2) in the `2n` variables
    /// `(x, y)`.
    fn spray_jets(&self, w: &TangentVector, order: usize) -> Result<Vec<Jet>>;

    /// Plain values `G^i(x, y)`.
    fn spray_value(&self, x: &[f64], y: &[f64]) -> Result<Vector> {
        let w = TangentVector::from_slices(x, y);
        let jets = self.spray_jets(&w, 0)?;
        Ok(Vector::from_iterator(jets.len(), jets.iter().map(|j| j.value())))
    }

    /// `G` and `N = ∂G/∂y`.
    fn spray_first_order(&self, w: &TangentVector) -> Result<(Vector, Matrix)> {
        let n = self.dim();
        let jets = self.spray_jets(w, 1)?;
        let g = Vector::from_iterator(n, jets.iter().map(|j| j.value()));
        let nl = Matrix::from_fn(n, n, |i, j| {
            jets[i].derivative(&[n + j]).expect("first-order jet")
        });
        Ok((g, nl))
    }

    fn as_metric(&self) -> Option<&MetricSpec> {
        None
    }
}

/// `G^i = ¼ g^{il} (y^k ∂²F²/∂y^l∂x^k - ∂F²/∂x^l)` as jets of order
/// `mj.order() - 2`.
pub(crate) fn metric_spray_jets(mj: &MetricJet) -> Result<Vec<Jet>> {
    let n = mj.dim();
    let order = mj.order();
    assert!(order >= 2, "spray coefficients need a second-order jet of F²");
    let target = order - 2;
    let f2 = &mj.jet;
    let dy: Vec<Jet> = (0..n).map(|l| f2.differentiate(n + l)).collect();
    let hess: Vec<Vec<Jet>> = (0..n)
        .map(|l| (0..n).map(|m| dy[l].differentiate(n + m) * 0.5).collect())
        .collect();
    let center = mj.at.stacked();
    let space = JetSpace::get(2 * n, target);
    let rhs: Vec<Vec<Jet>> = (0..n)
        .map(|l| {
            let mut acc = -f2.differentiate(l).truncate(target);
            for k in 0..n {
                let yk = Jet::variable(&space, center[n + k], n + k);
                acc = acc + yk * dy[l].differentiate(k);
            }
            vec![acc * 0.25]
        })
        .collect();
    // condition guard on the plain fundamental tensor
    let g0 = Matrix::from_fn(n, n, |i, j| hess[i][j].value());
    guarded_inverse(&g0)?;
    let sol = solve_jets(hess, rhs).ok_or(FinslerError::IllConditioned(f64::INFINITY))?;
    Ok(sol.into_iter().map(|mut row| row.remove(0)).collect())
}

impl Spray for MetricSpec {
    fn dim(&self) -> usize {
        MetricSpec::dim(self)
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn check_point(&self, x: &[f64], y: &[f64]) -> Result<()> {
        MetricSpec::check_point(self, x, y)
    }

    fn spray_jets(&self, w: &TangentVector, order: usize) -> Result<Vec<Jet>> {
        let mj = MetricJet::new(self, w, order + 2)?;
        metric_spray_jets(&mj)
    }

    fn as_metric(&self) -> Option<&MetricSpec> {
        Some(self)
    }
}

/// A spray given directly by a rule `(x, y) -> G(x, y)`.
#[derive(Clone)]
pub struct BareSpray {
    pub name: String,
    pub dim: usize,
    pub rule: Arc<dyn DynRule>,
}

impl fmt::Debug for BareSpray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BareSpray({}, dim {})", self.name, self.dim)
    }
}

impl Spray for BareSpray {
    fn dim(&self) -> usize {
        self.dim
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn check_point(&self, x: &[f64], y: &[f64]) -> Result<()> {
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < NULL_DIRECTION_SCALE {
            return Err(FinslerError::NullDirection(norm));
        }
        if x.len() != self.dim {
            return Err(FinslerError::Dimension(format!(
                "spray has dimension {}, got {}",
                self.dim,
                x.len()
            )));
        }
        Ok(())
    }

    fn spray_jets(&self, w: &TangentVector, order: usize) -> Result<Vec<Jet>> {
        self.check_point(w.x.as_slice(), w.y.as_slice())?;
        let vars = Jet::variables(&w.stacked(), order);
        let out = self.rule.eval_jet(&vars[..self.dim], &vars[self.dim..]);
        if out.len() != self.dim || out.iter().any(|j| !j.is_finite()) {
            return Err(FinslerError::Domain(format!(
                "spray rule {} is singular at {w:?}",
                self.name
            )));
        }
        Ok(out)
    }

    fn spray_value(&self, x: &[f64], y: &[f64]) -> Result<Vector> {
        self.check_point(x, y)?;
        let out = self.rule.eval_f64(x, y);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(FinslerError::Domain(format!("spray rule {} is singular", self.name)));
        }
        Ok(Vector::from_vec(out))
    }
}

/// Spray coefficients and their derivatives at one point of `TM∖0`.
#[derive(Debug, Clone)]
pub struct SprayData {
    pub at: TangentVector,
    /// `G^i`.
    pub g: Vector,
    /// `N^i_j = ∂G^i/∂y^j`.
    pub n: Matrix,
    /// Berwald coefficients `[i][j][k] = ∂²G^i/∂y^j∂y^k`.
    pub berwald: Tensor3,
    /// `[i][j] = ∂G^i/∂x^j`.
    pub dg_dx: Matrix,
    /// `[i][j][k] = ∂N^i_j/∂x^k`.
    pub dn_dx: Tensor3,
}

impl SprayData {
    pub fn from_jets(at: &TangentVector, jets: &[Jet]) -> Self {
        let n = at.dim();
        let d = |i: usize, vars: &[usize]| jets[i].derivative(vars).expect("second-order spray jet");
        SprayData {
            at: at.clone(),
            g: Vector::from_fn(n, |i, _| jets[i].value()),
            n: Matrix::from_fn(n, n, |i, j| d(i, &[n + j])),
            berwald: Tensor3::from_fn(n, |i, j, k| d(i, &[n + j, n + k])),
            dg_dx: Matrix::from_fn(n, n, |i, j| d(i, &[j])),
            dn_dx: Tensor3::from_fn(n, |i, j, k| d(i, &[n + j, k])),
        }
    }

    pub fn dim(&self) -> usize {
        self.at.dim()
    }

    /// Curvature endomorphism in the chart basis,
    /// `R^i_k = 2∂_k G^i - y^j ∂_j N^i_k + 2 G^j G^i_{jk} - N^i_j N^j_k`.
    pub fn curvature_matrix(&self) -> Matrix {
        let n = self.dim();
        let y = &self.at.y;
        let nn = &self.n * &self.n;
        let gb = self.berwald.contract_middle(&self.g);
        Matrix::from_fn(n, n, |i, k| {
            let ydn: f64 = (0..n).map(|j| y[j] * self.dn_dx.get(i, k, j)).sum();
            2.0 * self.dg_dx[(i, k)] - ydn + 2.0 * gb[(i, k)] - nn[(i, k)]
        })
    }

    /// Largest residual of `N y = 2G` and `G^i_{jk} y^j y^k = 2G`.
    pub fn homogeneity_residual(&self) -> f64 {
        let y = &self.at.y;
        let two_g = &self.g * 2.0;
        let r1 = (&self.n * y - &two_g).amax();
        let r2 = (self.berwald.contract_last_two(y, y) - two_g).amax();
        r1.max(r2)
    }

    /// The spray vector `S(w)` in raw `(∂x, ∂y)` components.
    pub fn spray_vector(&self) -> Vector {
        stack(&self.at.y, &(&self.g * -2.0))
    }
}

fn stack(a: &Vector, b: &Vector) -> Vector {
    Vector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
}

/// Splits a raw `2n` vector into its `∂x` and `∂y` blocks.
pub fn split(x: &Vector) -> (Vector, Vector) {
    let n = x.len() / 2;
    (x.rows(0, n).into_owned(), x.rows(n, n).into_owned())
}

pub fn spray_coefficients(s: &dyn Spray, w: &TangentVector) -> Result<SprayData> {
    let jets = s.spray_jets(w, 2)?;
    Ok(SprayData::from_jets(w, &jets))
}

/// `u^h = (u, -N u)` in raw `(∂x, ∂y)` components.
pub fn horizontal_lift(s: &SprayData, u: &Vector) -> Vector {
    stack(u, &-(&s.n * u))
}

/// `i_w⁻¹ 𝒱 X = b + N a` for `X = (a, b)`.
pub fn vertical_projector(s: &SprayData, x: &Vector) -> Vector {
    let (a, b) = split(x);
    b + &s.n * a
}

#[derive(Debug, Clone)]
pub struct CurvatureEndomorphism {
    pub at: TangentVector,
    pub r: Matrix,
}

impl CurvatureEndomorphism {
    pub fn apply(&self, u: &Vector) -> Vector {
        &self.r * u
    }
}

pub fn curvature_endomorphism(s: &dyn Spray, w: &TangentVector) -> Result<CurvatureEndomorphism> {
    let sd = spray_coefficients(s, w)?;
    Ok(CurvatureEndomorphism {
        at: w.clone(),
        r: sd.curvature_matrix(),
    })
}

/// Smallest accepted flag area `g(w,w)g(u,u) - g(w,u)²`.
pub const FLAG_AREA_TOLERANCE: f64 = 1e-10;

/// `K(w, u) = g_w(R_w u, u) / (g_w(w,w) g_w(u,u) - g_w(w,u)²)`.
pub fn flag_curvature(m: &MetricSpec, w: &TangentVector, u: &Vector) -> Result<f64> {
    let mj = MetricJet::new(m, w, 4)?;
    let (g, _) = crate::metric::fundamental_with_inverse(&mj)?;
    let sd = SprayData::from_jets(w, &metric_spray_jets(&mj)?);
    flag_curvature_from(&g, &sd.curvature_matrix(), &w.y, u)
}

pub(crate) fn flag_curvature_from(g: &Matrix, r: &Matrix, y: &Vector, u: &Vector) -> Result<f64> {
    let gp = |a: &Vector, b: &Vector| a.dot(&(g * b));
    let area = gp(y, y) * gp(u, u) - gp(y, u).powi(2);
    if area < FLAG_AREA_TOLERANCE {
        return Err(FinslerError::DegenerateFlag(area));
    }
    Ok(gp(&(r * u), u) / area)
}
