//! Lifts of the canonical connection, parameterised by their deviation
//! `(𝒞, 𝒞′)` from the Berwald lift.
//!
//! In the adapted frame `(δ_j, ∂_{y^j})` a lift acts on a vertical section
//! with fiber components `s^i(x, y)` by
//!
//! ```text
//! ∇_{δ_j} s    = δ_j s^i    + (G^i_jk + 𝒞′^i_jk) s^k
//! ∇_{∂y^j} s   = ∂_{y^j} s^i + 𝒞^i_jk s^k
//! ```
//!
//! For a metric spray the deviations are usually given in flat form,
//! `𝒞♭_jkl = g_lm 𝒞^m_jk`, with the lowered index in the last slot.
//! Admissibility is `𝒞(·, y) = 𝒞′(·, y) = 0`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ad::Jet;
use crate::curve::{same_grid, Curve, FieldAlongCurve};
use crate::error::{FinslerError, Result};
use crate::geometry::PointGeometry;
use crate::metric::{MetricSpec, TangentVector};
use crate::spray::{split, Spray};
use crate::sweep::{map_seeded, max_residual, seeded_rng};
use crate::tensor::{Matrix, Tensor3, Vector};

/// Relative size of `𝒞(·, y)` above which a lift is rejected.
pub const ADMISSIBILITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassicalKind {
    Berwald,
    Cartan,
    ChernRund,
    Hashiguchi,
}

impl ClassicalKind {
    pub const ALL: [ClassicalKind; 4] = [
        ClassicalKind::Berwald,
        ClassicalKind::Cartan,
        ClassicalKind::ChernRund,
        ClassicalKind::Hashiguchi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassicalKind::Berwald => "berwald",
            ClassicalKind::Cartan => "cartan",
            ClassicalKind::ChernRund => "chern-rund",
            ClassicalKind::Hashiguchi => "hashiguchi",
        }
    }
}

impl fmt::Display for ClassicalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassicalKind {
    type Err = FinslerError;

    fn from_str(s: &str) -> Result<Self> {
        ClassicalKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| FinslerError::InvalidLift(format!("unknown classical connection '{s}'")))
    }
}

pub type TensorRule = Arc<dyn Fn(&TangentVector) -> Tensor3 + Send + Sync>;

/// One of the two deviation tensors of a lift.
#[derive(Clone)]
pub enum LiftTensor {
    Zero,
    /// The Cartan tensor, in flat form.
    Cartan,
    /// The `C′` tensor, in flat form.
    CPrime,
    Random(Arc<RandomTensorField>),
    /// A flat rule `w ↦ 𝒞♭_w`; needs a metric to raise.
    Flat(TensorRule),
    /// A rule for the raised tensor `[i][j][k] = 𝒞^i_jk`.
    Raw(TensorRule),
}

impl fmt::Debug for LiftTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LiftTensor::Zero => f.write_str("Zero"),
            LiftTensor::Cartan => f.write_str("Cartan"),
            LiftTensor::CPrime => f.write_str("CPrime"),
            LiftTensor::Random(r) => write!(f, "Random({:?})", r.projected),
            LiftTensor::Flat(_) => f.write_str("Flat(..)"),
            LiftTensor::Raw(_) => f.write_str("Raw(..)"),
        }
    }
}

/// `[i][j][k] = Σ_l ginv[i][l] flat[j][k][l]`.
fn raise(flat: &Tensor3, ginv: &Matrix) -> Tensor3 {
    let n = flat.dim();
    Tensor3::from_fn(n, |i, j, k| (0..n).map(|l| ginv[(i, l)] * flat.get(j, k, l)).sum())
}

/// `[j][k][l] = Σ_i g[l][i] raised[i][j][k]`.
fn lower(raised: &Tensor3, g: &Matrix) -> Tensor3 {
    let n = raised.dim();
    Tensor3::from_fn(n, |j, k, l| (0..n).map(|i| g[(l, i)] * raised.get(i, j, k)).sum())
}

impl LiftTensor {
    /// Returns the flat form (metric case only) and the raised form.
    fn evaluate(&self, geo: &PointGeometry) -> Result<(Option<Tensor3>, Tensor3)> {
        let n = geo.dim();
        let from_flat = |flat: Tensor3| -> Result<(Option<Tensor3>, Tensor3)> {
            let md = geo.metric()?;
            let raised = raise(&flat, &md.ginv);
            Ok((Some(flat), raised))
        };
        match self {
            LiftTensor::Zero => Ok((geo.metric.as_ref().map(|_| Tensor3::zeros(n)), Tensor3::zeros(n))),
            LiftTensor::Cartan => from_flat(geo.metric()?.cartan.clone()),
            LiftTensor::CPrime => from_flat(geo.metric()?.cprime.clone()),
            LiftTensor::Flat(rule) => from_flat(rule(&geo.at)),
            LiftTensor::Random(field) => {
                let flat = field.eval(&geo.at);
                match &geo.metric {
                    Some(_) => from_flat(flat),
                    None => Ok((None, Tensor3::from_fn(n, |i, j, k| flat.get(j, k, i)))),
                }
            }
            LiftTensor::Raw(rule) => {
                let raised = rule(&geo.at);
                let flat = geo.metric.as_ref().map(|md| lower(&raised, &md.g));
                Ok((flat, raised))
            }
        }
    }
}

/// A lift given by its deviation pair from the Berwald lift.
#[derive(Debug, Clone)]
pub struct LiftSpec {
    pub name: String,
    /// `𝒞`: vertical-direction deviation.
    pub c: LiftTensor,
    /// `𝒞′`: horizontal-direction deviation.
    pub cprime: LiftTensor,
}

impl LiftSpec {
    pub fn new(name: &str, c: LiftTensor, cprime: LiftTensor) -> Self {
        Self {
            name: name.into(),
            c,
            cprime,
        }
    }
}

/// Berwald `(0, 0)`, Cartan `(C, C′)`, Chern-Rund `(0, C′)`,
/// Hashiguchi `(C, 0)`.
pub fn classical_lift(kind: ClassicalKind) -> LiftSpec {
    use LiftTensor::*;
    let (c, cp) = match kind {
        ClassicalKind::Berwald => (Zero, Zero),
        ClassicalKind::Cartan => (Cartan, CPrime),
        ClassicalKind::ChernRund => (Zero, CPrime),
        ClassicalKind::Hashiguchi => (Cartan, Zero),
    };
    LiftSpec::new(kind.name(), c, cp)
}

/// Smooth random tensor field in flat layout `[j][k][l]`:
/// `T = A + P_m x^m + Q_m y^m / |y|`, with the chosen slots projected
/// off `y` by `I - y yᵀ/|y|²`. Slot 1 (the section slot) is always
/// projected, which makes the field admissible.
#[derive(Debug, Clone)]
pub struct RandomTensorField {
    a: Tensor3,
    px: Vec<Tensor3>,
    qy: Vec<Tensor3>,
    projected: [bool; 3],
}

impl RandomTensorField {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64, projected: [bool; 3]) -> Self {
        let mut draw = || Tensor3::from_fn(n, |_, _, _| scale * rng.random_range(-1.0..1.0));
        let a = draw();
        let px = (0..n).map(|_| draw()).collect();
        let qy = (0..n).map(|_| draw()).collect();
        let mut projected = projected;
        projected[1] = true;
        Self { a, px, qy, projected }
    }

    pub fn eval(&self, w: &TangentVector) -> Tensor3 {
        let n = self.a.dim();
        let ynorm = w.y.norm();
        let mut t = self.a.clone();
        for m in 0..n {
            t = t.add(&self.px[m].scale(w.x[m])).add(&self.qy[m].scale(w.y[m] / ynorm));
        }
        let p = Matrix::identity(n, n) - &w.y * w.y.transpose() / (ynorm * ynorm);
        for (slot, &on) in self.projected.iter().enumerate() {
            if on {
                t = project_slot(&t, &p, slot);
            }
        }
        t
    }
}

fn project_slot(t: &Tensor3, p: &Matrix, slot: usize) -> Tensor3 {
    let n = t.dim();
    Tensor3::from_fn(n, |a, b, c| {
        (0..n)
            .map(|s| {
                let v = match slot {
                    0 => t.get(s, b, c),
                    1 => t.get(a, s, c),
                    _ => t.get(a, b, s),
                };
                v * p[(s, [a, b, c][slot])]
            })
            .sum()
    })
}

/// Which extra constraints a random lift is built to satisfy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RandomLiftOptions {
    /// `𝒞′(y, ·) = 0`.
    pub t1: bool,
    /// Third flat slots of both tensors null on `y`.
    pub metric_compatible: bool,
}

pub fn random_lift(n: usize, seed: u64, opts: RandomLiftOptions) -> LiftSpec {
    let mut rng = seeded_rng(seed);
    let c = RandomTensorField::sample(&mut rng, n, 0.5, [false, true, opts.metric_compatible]);
    let cp = RandomTensorField::sample(&mut rng, n, 0.5, [opts.t1, true, opts.metric_compatible]);
    LiftSpec::new(
        &format!("random-{seed}"),
        LiftTensor::Random(Arc::new(c)),
        LiftTensor::Random(Arc::new(cp)),
    )
}

/// Connection coefficients of a lift at one point.
#[derive(Debug, Clone)]
pub struct LiftCoefficients {
    pub c_flat: Option<Tensor3>,
    pub cprime_flat: Option<Tensor3>,
    /// `[i][j][k] = 𝒞^i_jk`.
    pub c: Tensor3,
    /// `[i][j][k] = 𝒞′^i_jk`.
    pub cprime: Tensor3,
    /// Horizontal coefficients `G^i_jk + 𝒞′^i_jk`.
    pub horizontal: Tensor3,
}

impl LiftCoefficients {
    pub fn new(lift: &LiftSpec, geo: &PointGeometry) -> Result<Self> {
        let (c_flat, c) = lift.c.evaluate(geo)?;
        let (cprime_flat, cprime) = lift.cprime.evaluate(geo)?;
        let y = &geo.at.y;
        for (label, t) in [("𝒞", &c), ("𝒞′", &cprime)] {
            let defect = t.contract_last(y).amax();
            let scale = y.norm() * (1.0 + t.max_abs());
            if !(defect <= ADMISSIBILITY_TOLERANCE * scale) {
                return Err(FinslerError::InvalidLift(format!(
                    "{}: {label}(·, w) = {defect:e} at {:?}",
                    lift.name, geo.at
                )));
            }
        }
        let horizontal = geo.spray.berwald.add(&cprime);
        Ok(Self {
            c_flat,
            cprime_flat,
            c,
            cprime,
            horizontal,
        })
    }

    /// Adapted components `(a, b)` of a raw vector `(X_x, X_y)`.
    fn adapted(geo: &PointGeometry, x: &Vector) -> (Vector, Vector) {
        let (a, b) = split(x);
        let b = b + &geo.spray.n * &a;
        (a, b)
    }

    /// `∇_X s` for a vertical section given by order-1 jets of its fiber
    /// components in the `2n` variables `(x, y)`.
    pub fn nabla(&self, geo: &PointGeometry, x: &Vector, section: &[Jet]) -> Result<Vector> {
        let n = geo.dim();
        if section.len() != n || x.len() != 2 * n {
            return Err(FinslerError::Dimension(format!(
                "section of length {} and direction of length {} in dimension {n}",
                section.len(),
                x.len()
            )));
        }
        let s = Vector::from_iterator(n, section.iter().map(|j| j.value()));
        let ds = Vector::from_iterator(
            n,
            section.iter().map(|j| {
                (0..2 * n)
                    .map(|v| x[v] * j.derivative(&[v]).expect("order-1 section jet"))
                    .sum::<f64>()
            }),
        );
        let (a, b) = Self::adapted(geo, x);
        Ok(ds + self.horizontal.contract_last_two(&a, &s) + self.c.contract_last_two(&b, &s))
    }

    /// `T(X, Y)` for constant adapted-frame fields; all brackets of such
    /// fields are vertical, so `𝒥[X, Y]` drops out.
    pub fn torsion(&self, geo: &PointGeometry, x: &Vector, y: &Vector) -> Vector {
        let (ax, bx) = Self::adapted(geo, x);
        let (ay, by) = Self::adapted(geo, y);
        self.horizontal.contract_last_two(&ax, &ay) + self.c.contract_last_two(&bx, &ay)
            - self.horizontal.contract_last_two(&ay, &ax)
            - self.c.contract_last_two(&by, &ax)
    }

    /// Horizontal and vertical components of `∇g`:
    /// `H[j][k][l] = (∇_{δ_j} g)_kl` and `V[j][k][l] = (∇_{∂y^j} g)_kl`.
    pub fn nabla_g(&self, geo: &PointGeometry) -> Result<(Tensor3, Tensor3)> {
        let md = geo.metric()?;
        let n = geo.dim();
        let (g, c, nl) = (&md.g, &md.cartan, &geo.spray.n);
        let gh = &self.horizontal;
        let h = Tensor3::from_fn(n, |j, k, l| {
            let mut acc = md.dg_dx.get(k, l, j);
            for s in 0..n {
                acc -= 2.0 * nl[(s, j)] * c.get(s, k, l);
                acc -= gh.get(s, j, k) * g[(s, l)] + gh.get(s, j, l) * g[(k, s)];
            }
            acc
        });
        let v = Tensor3::from_fn(n, |j, k, l| {
            let mut acc = 2.0 * c.get(j, k, l);
            for s in 0..n {
                acc -= self.c.get(s, j, k) * g[(s, l)] + self.c.get(s, j, l) * g[(k, s)];
            }
            acc
        });
        Ok((h, v))
    }

    /// `(∇_X g)` as a matrix for a raw direction `X`.
    pub fn nabla_g_along(&self, geo: &PointGeometry, x: &Vector) -> Result<Matrix> {
        let (h, v) = self.nabla_g(geo)?;
        let (a, b) = Self::adapted(geo, x);
        Ok(h.contract_first(&a) + v.contract_first(&b))
    }

    /// `i_w⁻¹ ℛ(S, X) C` for a raw `X`.
    pub fn curvature(&self, geo: &PointGeometry, x: &Vector) -> Vector {
        let n = geo.dim();
        let sd = &geo.spray;
        let y = &geo.at.y;
        let (a, b) = Self::adapted(geo, x);
        // [δ_j, δ_k] = (δ_k N^i_j - δ_j N^i_k) ∂_{y^i}
        let delta_n = |i: usize, j: usize, k: usize| -> f64 {
            sd.dn_dx.get(i, j, k) - (0..n).map(|s| sd.n[(s, k)] * sd.berwald.get(i, j, s)).sum::<f64>()
        };
        let bracket = Vector::from_fn(n, |i, _| {
            let mut acc = 0.0;
            for j in 0..n {
                for k in 0..n {
                    acc += y[j] * a[k] * (delta_n(i, j, k) - delta_n(i, k, j));
                }
            }
            acc
        });
        bracket + &sd.n * &b - self.horizontal.contract_last_two(y, &b)
    }
}

pub fn nabla_apply(lift: &LiftSpec, geo: &PointGeometry, x: &Vector, section: &[Jet]) -> Result<Vector> {
    LiftCoefficients::new(lift, geo)?.nabla(geo, x, section)
}

pub fn torsion(lift: &LiftSpec, geo: &PointGeometry, x: &Vector, y: &Vector) -> Result<Vector> {
    Ok(LiftCoefficients::new(lift, geo)?.torsion(geo, x, y))
}

/// `i_w⁻¹ ℛ(S, u^𝔥 + ξ) C`, where `ξ` is optional vertical noise given by
/// its fiber components.
pub fn lift_curvature(lift: &LiftSpec, geo: &PointGeometry, u: &Vector, noise: Option<&Vector>) -> Result<Vector> {
    let coeffs = LiftCoefficients::new(lift, geo)?;
    let mut x = crate::spray::horizontal_lift(&geo.spray, u);
    if let Some(xi) = noise {
        let n = geo.dim();
        for i in 0..n {
            x[n + i] += xi[i];
        }
    }
    Ok(coeffs.curvature(geo, &x))
}

/// Canonical vertical section `C = y^i ∂_{y^i}` as order-1 jets at `w`.
pub fn canonical_section(w: &TangentVector) -> Vec<Jet> {
    let n = w.dim();
    Jet::variables(&w.stacked(), 1).split_off(n)
}

/// Constant vertical section with fiber components `s`.
pub fn constant_section(w: &TangentVector, s: &Vector) -> Vec<Jet> {
    let space = crate::ad::JetSpace::get(2 * w.dim(), 1);
    s.iter().map(|&v| Jet::constant(&space, v)).collect()
}

/// Coefficients `A^i_jk(w)` of the affine connection `D^w`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineCoefficients {
    pub at: TangentVector,
    pub a: Tensor3,
}

impl AffineCoefficients {
    /// `A(u, v)^i = A^i_jk u^j v^k`.
    pub fn apply(&self, u: &Vector, v: &Vector) -> Vector {
        self.a.contract_last_two(u, v)
    }
}

pub fn affine_coefficients(lift: &LiftSpec, s: &dyn Spray, w: &TangentVector) -> Result<AffineCoefficients> {
    let geo = PointGeometry::new(s, w)?;
    affine_coefficients_at(lift, &geo)
}

pub fn affine_coefficients_at(lift: &LiftSpec, geo: &PointGeometry) -> Result<AffineCoefficients> {
    Ok(AffineCoefficients {
        at: geo.at.clone(),
        a: LiftCoefficients::new(lift, geo)?.horizontal,
    })
}

/// `D^W V/dt = V̇ + A(λ, W)(λ̇, V)` along a sampled curve.
pub fn covariant_derivative_curve(
    lift: &LiftSpec,
    s: &dyn Spray,
    curve: &Curve,
    w: &FieldAlongCurve,
    v: &FieldAlongCurve,
) -> Result<FieldAlongCurve> {
    same_grid(&curve.grid, &w.grid)?;
    same_grid(&curve.grid, &v.grid)?;
    if let Some(i) = w
        .values
        .iter()
        .position(|wi| wi.norm() < crate::metric::NULL_DIRECTION_SCALE)
    {
        return Err(FinslerError::NullReference(i));
    }
    let vdot = v.derivative()?;
    let values = (0..curve.len())
        .map(|i| {
            let at = TangentVector::new(curve.points[i].clone(), w.values[i].clone());
            let a = affine_coefficients(lift, s, &at)?;
            Ok(&vdot.values[i] + a.apply(&curve.velocities[i], &v.values[i]))
        })
        .collect::<Result<Vec<_>>>()?;
    FieldAlongCurve::new(curve.grid.clone(), values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    T1,
    T2,
    T3,
    M1,
    M2,
    M3,
    M4,
    M5,
    M6,
    M7,
}

impl Condition {
    pub const ALL: [Condition; 10] = [
        Condition::T1,
        Condition::T2,
        Condition::T3,
        Condition::M1,
        Condition::M2,
        Condition::M3,
        Condition::M4,
        Condition::M5,
        Condition::M6,
        Condition::M7,
    ];
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Condition {
    type Err = FinslerError;

    fn from_str(s: &str) -> Result<Self> {
        Condition::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| FinslerError::Domain(format!("unknown condition '{s}'")))
    }
}

fn basis(n: usize, i: usize) -> Vector {
    let mut e = Vector::zeros(n);
    e[i] = 1.0;
    e
}

/// Residual of one condition at one point.
pub fn condition_residual(cond: Condition, coeffs: &LiftCoefficients, geo: &PointGeometry) -> Result<f64> {
    let n = geo.dim();
    let y = &geo.at.y;
    let sd = &geo.spray;
    let raw_basis: Vec<Vector> = (0..2 * n).map(|i| basis(2 * n, i)).collect();
    let hbasis: Vec<Vector> = (0..n)
        .map(|i| crate::spray::horizontal_lift(sd, &basis(n, i)))
        .collect();
    let pairs_max = |xs: &[Vector], ys: &[Vector]| {
        max_residual(
            xs.iter()
                .flat_map(|x| ys.iter().map(move |z| coeffs.torsion(geo, x, z).amax())),
        )
    };
    Ok(match cond {
        Condition::T1 => pairs_max(&[sd.spray_vector()], &raw_basis),
        Condition::T2 => pairs_max(&hbasis, &hbasis),
        Condition::T3 => pairs_max(&raw_basis, &raw_basis),
        Condition::M2 => {
            let flat = coeffs.c_flat.as_ref().ok_or_else(|| FinslerError::Domain("M2 needs a metric".into()))?;
            flat.contract_last(y).amax()
        }
        Condition::M7 => {
            let flat = coeffs.c_flat.as_ref().ok_or_else(|| FinslerError::Domain("M7 needs a metric".into()))?;
            flat.sub(&flat.permuted([0, 2, 1])).max_abs()
        }
        _ => {
            let md = geo.metric()?;
            let (h, v) = coeffs.nabla_g(geo)?;
            let two_c = md.cartan.scale(2.0);
            let two_cp = md.cprime.scale(2.0);
            match cond {
                Condition::M1 => h.contract_last(y).amax().max(v.contract_last(y).amax()),
                Condition::M3 => h.max_abs().max(v.sub(&two_c).max_abs()),
                Condition::M4 => h.sub(&two_cp).max_abs().max(v.max_abs()),
                Condition::M5 => h.sub(&two_cp).max_abs().max(v.sub(&two_c).max_abs()),
                Condition::M6 => h.max_abs().max(v.max_abs()),
                _ => unreachable!(),
            }
        }
    })
}

/// Max residual per condition over random sample points.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub lift: String,
    pub metric: String,
    pub samples: usize,
    pub residuals: Vec<(Condition, f64)>,
    pub errors: Vec<String>,
}

impl ConditionReport {
    pub fn residual(&self, cond: Condition) -> Option<f64> {
        self.residuals.iter().find(|(c, _)| *c == cond).map(|(_, r)| *r)
    }

    pub fn holds(&self, cond: Condition, tol: f64) -> bool {
        self.errors.is_empty() && self.residual(cond).is_some_and(|r| r <= tol)
    }
}

pub fn check_conditions(
    lift: &LiftSpec,
    m: &MetricSpec,
    conditions: &[Condition],
    samples: usize,
    seed: u64,
) -> ConditionReport {
    let per_point = map_seeded(samples, seed, |rng| -> Result<Vec<f64>> {
        let w = m.sample_tangent(rng);
        let geo = PointGeometry::of_metric(m, &w)?;
        let coeffs = LiftCoefficients::new(lift, &geo)?;
        conditions
            .iter()
            .map(|&c| condition_residual(c, &coeffs, &geo))
            .collect()
    });
    let mut residuals: Vec<(Condition, f64)> = conditions.iter().map(|&c| (c, 0.0)).collect();
    let mut errors = Vec::new();
    for r in per_point {
        match r {
            Ok(values) => {
                for (slot, v) in residuals.iter_mut().zip(values) {
                    slot.1 = max_residual([slot.1, v]);
                }
            }
            Err(e) => errors.push(e.to_string()),
        }
    }
    ConditionReport {
        lift: lift.name.clone(),
        metric: m.name.clone(),
        samples,
        residuals,
        errors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spray::{curvature_endomorphism, horizontal_lift};

    fn randers_point() -> (MetricSpec, TangentVector) {
        (
            MetricSpec::randers_default(),
            TangentVector::from_slices(&[0.2, -0.3], &[0.6, 0.9]),
        )
    }

    #[test]
    fn berwald_rules_are_zero() {
        let (m, w) = randers_point();
        let geo = PointGeometry::of_metric(&m, &w).unwrap();
        let k = LiftCoefficients::new(&classical_lift(ClassicalKind::Berwald), &geo).unwrap();
        assert_eq!(k.c.max_abs(), 0.0);
        assert_eq!(k.cprime.max_abs(), 0.0);
        assert_eq!(k.c_flat.unwrap().max_abs(), 0.0);
    }

    #[test]
    fn hashiguchi_is_berwald_on_riemannian() {
        let m = MetricSpec::sphere(2);
        let w = TangentVector::from_slices(&[0.4, 0.1], &[1.0, -0.3]);
        let geo = PointGeometry::of_metric(&m, &w).unwrap();
        let k = LiftCoefficients::new(&classical_lift(ClassicalKind::Hashiguchi), &geo).unwrap();
        assert!(k.c.max_abs() < 1e-12 && k.cprime.max_abs() < 1e-12);
    }

    #[test]
    fn cartan_flat_rule_is_cartan_tensor() {
        let (m, w) = randers_point();
        let geo = PointGeometry::of_metric(&m, &w).unwrap();
        let k = LiftCoefficients::new(&classical_lift(ClassicalKind::Cartan), &geo).unwrap();
        let c = crate::metric::cartan_tensor(&m, &w).unwrap().c;
        assert!(k.c_flat.unwrap().sub(&c).max_abs() < 1e-12);
    }

    #[test]
    fn almost_projectable_on_canonical_section() {
        let (m, w) = randers_point();
        let geo = PointGeometry::of_metric(&m, &w).unwrap();
        let section = canonical_section(&w);
        for kind in ClassicalKind::ALL {
            let lift = classical_lift(kind);
            let b = Vector::from_column_slice(&[0.0, 0.0, 0.3, -0.7]);
            let out = nabla_apply(&lift, &geo, &b, &section).unwrap();
            assert!((out - Vector::from_column_slice(&[0.3, -0.7])).amax() < 1e-12);
            let h = horizontal_lift(&geo.spray, &Vector::from_column_slice(&[1.0, 2.0]));
            assert!(nabla_apply(&lift, &geo, &h, &section).unwrap().amax() < 1e-12);
        }
    }

    #[test]
    fn euclidean_constant_section_is_parallel() {
        let m = MetricSpec::euclidean(2);
        let w = TangentVector::from_slices(&[1.0, 2.0], &[0.3, 0.4]);
        let geo = PointGeometry::of_metric(&m, &w).unwrap();
        let s = constant_section(&w, &Vector::from_column_slice(&[2.0, -1.0]));
        let x = Vector::from_column_slice(&[0.5, 0.1, -0.2, 0.9]);
        let out = nabla_apply(&classical_lift(ClassicalKind::Berwald), &geo, &x, &s).unwrap();
        assert!(out.amax() < 1e-15);
    }

    #[test]
    fn torsion_spray_against_vertical_vanishes() {
        let (m, w) = randers_point();
        let geo = PointGeometry::of_metric(&m, &w).unwrap();
        let s = geo.spray.spray_vector();
        let vertical = Vector::from_column_slice(&[0.0, 0.0, 1.3, -0.4]);
        for kind in ClassicalKind::ALL {
            let t = torsion(&classical_lift(kind), &geo, &s, &vertical).unwrap();
            assert!(t.amax() < 1e-12, "{kind}: {t}");
        }
        let rl = random_lift(2, 4, RandomLiftOptions::default());
        assert!(torsion(&rl, &geo, &s, &vertical).unwrap().amax() < 1e-10);
    }

    #[test]
    fn inadmissible_lift_is_rejected() {
        let (m, w) = randers_point();
        let geo = PointGeometry::of_metric(&m, &w).unwrap();
        let bad = LiftSpec::new(
            "bad",
            LiftTensor::Flat(Arc::new(|_w: &TangentVector| Tensor3::from_fn(2, |_, _, _| 1.0))),
            LiftTensor::Zero,
        );
        assert!(matches!(
            LiftCoefficients::new(&bad, &geo),
            Err(FinslerError::InvalidLift(_))
        ));
    }

    #[test]
    fn lift_curvature_matches_spray_curvature() {
        let (m, w) = randers_point();
        let geo = PointGeometry::of_metric(&m, &w).unwrap();
        let r = curvature_endomorphism(&m, &w).unwrap();
        let u = Vector::from_column_slice(&[0.4, -1.1]);
        for kind in ClassicalKind::ALL {
            let out = lift_curvature(&classical_lift(kind), &geo, &u, None).unwrap();
            assert!((out - r.apply(&u)).amax() < 1e-10);
        }
    }

    #[test]
    fn condition_names_round_trip() {
        for c in Condition::ALL {
            assert_eq!(c.to_string().parse::<Condition>().unwrap(), c);
        }
        for k in ClassicalKind::ALL {
            assert_eq!(k.to_string().parse::<ClassicalKind>().unwrap(), k);
        }
    }
}
