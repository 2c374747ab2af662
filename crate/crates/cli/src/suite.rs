//! The bundled verification corpus run by `verify-all`.
//!
//! Each criterion collects named measurements, each compared against a
//! threshold. A criterion passes when every measurement lies on the required
//! side of its threshold and no computation failed.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use finsler_core::ad::{Jet, Scalar};
use finsler_core::connections::{
    affine_coefficients_at, check_conditions, classical_lift, covariant_derivative_curve, lift_curvature,
    random_lift, ClassicalKind, Condition, LiftCoefficients, LiftSpec, RandomLiftOptions,
};
use finsler_core::curve::{uniform_grid, Curve, FieldAlongCurve};
use finsler_core::geometry::{cprime_tensor, PointGeometry};
use finsler_core::metric::{
    cartan_tensor, check_metric, fundamental_tensor, metric_value, random_unit, MetricSpec, RiemannianField,
    TangentVector,
};
use finsler_core::ode::OdeOptions;
use finsler_core::oracle;
use finsler_core::spray::{curvature_endomorphism, flag_curvature, SprayData};
use finsler_core::submanifold::{
    lagrangian_residual, legendre_transform, normal_bundle_tangent_basis, normal_cone_solve, sff_connection,
    sff_symplectic, NormalVector, Submanifold,
};
use finsler_core::sweep::{map_seeded, SampleRng};
use finsler_core::tensor::{Matrix, Vector};
use finsler_core::variational::{
    integrate_geodesic_on, jacobi_integrate, jacobi_integrate_with, jacobi_variation_field, parallel_transport,
    second_variation_formula, variation_energy_derivatives, CurvatureModel, Endpoint, VariationFamily,
};
use finsler_core::Result;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// The value must stay strictly below the threshold.
    Below,
    /// The value must exceed the threshold.
    Above,
}

#[derive(Debug, Clone, Serialize)]
pub struct Measurement {
    pub label: String,
    pub value: f64,
    pub threshold: f64,
    pub bound: Bound,
}

impl Measurement {
    pub fn ok(&self) -> bool {
        match self.bound {
            Bound::Below => self.value < self.threshold,
            Bound::Above => self.value > self.threshold,
        }
    }

    /// How close the value is to violating its bound; above 1 means failed.
    pub fn severity(&self) -> f64 {
        let r = match self.bound {
            Bound::Below => self.value / self.threshold,
            Bound::Above => self.threshold / self.value,
        };
        if r.is_nan() {
            f64::INFINITY
        } else {
            r
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: String,
    pub measurements: Vec<Measurement>,
    pub errors: Vec<String>,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && !self.measurements.is_empty() && self.measurements.iter().all(Measurement::ok)
    }

    /// The measurement nearest to (or furthest past) its threshold.
    pub fn worst(&self) -> Option<&Measurement> {
        self.measurements
            .iter()
            .max_by(|a, b| a.severity().total_cmp(&b.severity()))
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "[{verdict}] criterion {}: {}", self.id, self.title)?;
        if let Some(m) = self.worst() {
            let op = if m.bound == Bound::Below { "<" } else { ">" };
            write!(f, "; tightest: {} = {:.3e} (need {op} {:.0e})", m.label, m.value, m.threshold)?;
        }
        if let Some(e) = self.errors.first() {
            write!(f, "; {} error(s), first: {e}", self.errors.len())?;
        }
        write!(f, " [{:.1} s]", self.seconds)
    }
}

#[derive(Default)]
struct Recorder {
    measurements: Vec<Measurement>,
    errors: Vec<String>,
}

impl Recorder {
    fn push(&mut self, label: String, value: Result<f64>, threshold: f64, bound: Bound) {
        match value {
            Ok(value) => self.measurements.push(Measurement {
                label,
                value,
                threshold,
                bound,
            }),
            Err(e) => self.errors.push(format!("{label}: {e}")),
        }
    }

    fn below(&mut self, label: impl Into<String>, value: Result<f64>, threshold: f64) {
        self.push(label.into(), value, threshold, Bound::Below);
    }

    fn above(&mut self, label: impl Into<String>, value: Result<f64>, threshold: f64) {
        self.push(label.into(), value, threshold, Bound::Above);
    }

    fn finish(self, id: u8, title: &str, start: Instant) -> CriterionReport {
        CriterionReport {
            id,
            title: title.into(),
            measurements: self.measurements,
            errors: self.errors,
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

/// Maximum over per-sample results, or the first error.
fn max_of(results: Vec<Result<f64>>) -> Result<f64> {
    results.into_iter().try_fold(0.0f64, |acc, r| Ok(acc.max(r?)))
}

/// Component-wise maximum over per-sample tuples of residuals.
fn max_each<const K: usize>(results: Vec<Result<[f64; K]>>) -> Result<[f64; K]> {
    results.into_iter().try_fold([0.0f64; K], |mut acc, r| {
        for (a, v) in acc.iter_mut().zip(r?) {
            *a = a.max(v);
        }
        Ok(acc)
    })
}

fn unit_tangent(m: &MetricSpec, rng: &mut SampleRng) -> Result<TangentVector> {
    let w = m.sample_tangent(rng);
    let f = metric_value(m, &w)?;
    Ok(w.scaled(1.0 / f))
}

// ---------------------------------------------------------------- 1

pub fn riemannian_reduction(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut rec = Recorder::default();
    let models = [
        (MetricSpec::sphere(2), RiemannianField::Sphere { dim: 2 }, 1.0),
        (MetricSpec::hyperbolic(2), RiemannianField::Hyperbolic { dim: 2 }, -1.0),
    ];
    for (m, field, k) in &models {
        let flags = map_seeded(100, seed, |rng| {
            let w = m.sample_tangent(rng);
            let u = random_unit(rng, 2);
            Ok((flag_curvature(m, &w, &u)? - k).abs())
        });
        rec.below(format!("{} |K - ({k})| over 100 flags", m.name), max_of(flags), 1e-6);
        let symbols = map_seeded(25, seed ^ 0x51, |rng| {
            let w = m.sample_tangent(rng);
            let lc = oracle::levi_civita(field, w.x.as_slice())?;
            let geo = PointGeometry::of_metric(m, &w)?;
            ClassicalKind::ALL.iter().try_fold(0.0f64, |acc, &kind| {
                let a = affine_coefficients_at(&classical_lift(kind), &geo)?;
                Ok(acc.max(a.a.sub(&lc.gamma).max_abs()))
            })
        });
        rec.below(
            format!("{} affine coefficients vs Christoffel symbols", m.name),
            max_of(symbols),
            1e-8,
        );
    }
    rec.below("runtime [s]", Ok(start.elapsed().as_secs_f64()), 10.0);
    rec.finish(1, "Riemannian reduction", start)
}

// ---------------------------------------------------------------- 2

/// Conditions each classical connection is characterised by.
pub fn characterizing_conditions(kind: ClassicalKind) -> &'static [Condition] {
    match kind {
        ClassicalKind::Berwald => &[Condition::T3, Condition::M5],
        ClassicalKind::Cartan => &[Condition::T2, Condition::M6, Condition::M7],
        ClassicalKind::ChernRund => &[Condition::T3, Condition::M3],
        ClassicalKind::Hashiguchi => &[Condition::T2, Condition::M4, Condition::M7],
    }
}

pub fn condition_matrix(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut rec = Recorder::default();
    let m = MetricSpec::randers_default();
    for kind in ClassicalKind::ALL {
        let report = check_conditions(&classical_lift(kind), &m, &Condition::ALL, 50, seed);
        rec.errors.extend(report.errors.iter().map(|e| format!("{kind}: {e}")));
        for &c in characterizing_conditions(kind) {
            let r = report.residual(c).ok_or_else(|| missing(c));
            rec.below(format!("{kind} {c}"), r, 1e-7);
        }
        if kind == ClassicalKind::Berwald {
            let r = report.residual(Condition::M6).ok_or_else(|| missing(Condition::M6));
            rec.above("berwald M6 (must fail)", r, 1e-3);
        }
    }
    rec.below("runtime [s]", Ok(start.elapsed().as_secs_f64()), 30.0);
    rec.finish(2, "condition matrix on Randers", start)
}

fn missing(c: Condition) -> finsler_core::FinslerError {
    finsler_core::FinslerError::Index(format!("condition {c} was not evaluated"))
}

// ---------------------------------------------------------------- 3

/// Lifts compared by the lift-independence sweep: Berwald, Cartan and
/// `random` random lifts satisfying T1, plus `random` unconstrained ones.
pub struct LiftFamily {
    pub t1: Vec<LiftSpec>,
    pub general: Vec<LiftSpec>,
}

impl LiftFamily {
    pub fn new(n: usize, random: u64, seed: u64) -> Self {
        let t1 = RandomLiftOptions {
            t1: true,
            ..Default::default()
        };
        let mut t1_lifts = vec![classical_lift(ClassicalKind::Berwald), classical_lift(ClassicalKind::Cartan)];
        t1_lifts.extend((0..random).map(|i| random_lift(n, seed.wrapping_add(100 + i), t1)));
        let general = (0..random)
            .map(|i| random_lift(n, seed.wrapping_add(200 + i), RandomLiftOptions::default()))
            .collect();
        LiftFamily { t1: t1_lifts, general }
    }

    /// At one random point: `[curvature spread over all lifts, the same with
    /// vertical noise over T1 lifts, D^W_W spread over T1 lifts]`.
    pub fn spreads(&self, m: &MetricSpec, rng: &mut SampleRng) -> Result<[f64; 3]> {
        let n = m.dim();
        let w = m.sample_tangent(rng);
        let u = random_unit(rng, n);
        let noise = random_unit(rng, n) * 0.7;
        let v = random_unit(rng, n);
        let geo = PointGeometry::of_metric(m, &w)?;
        let reference = curvature_endomorphism(m, &w)?.apply(&u);
        let berwald_dww = affine_coefficients_at(&self.t1[0], &geo)?.apply(&w.y, &v);
        let (mut curv, mut noisy, mut dww) = (0.0f64, 0.0f64, 0.0f64);
        for lift in self.t1.iter().chain(&self.general) {
            curv = curv.max((lift_curvature(lift, &geo, &u, None)? - &reference).amax());
        }
        for lift in &self.t1 {
            noisy = noisy.max((lift_curvature(lift, &geo, &u, Some(&noise))? - &reference).amax());
            dww = dww.max((affine_coefficients_at(lift, &geo)?.apply(&w.y, &v) - &berwald_dww).amax());
        }
        Ok([curv, noisy, dww])
    }
}

pub fn lift_independence(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut rec = Recorder::default();
    let m = MetricSpec::randers_default();
    let family = LiftFamily::new(2, 5, seed);
    match max_each(map_seeded(25, seed, |rng| family.spreads(&m, rng))) {
        Ok([curv, noisy, dww]) => {
            rec.below("curvature spread over 12 admissible lifts", Ok(curv), 1e-7);
            rec.below("curvature spread with vertical noise (T1 lifts)", Ok(noisy), 1e-7);
            rec.below("D^W_W spread over 7 T1 lifts", Ok(dww), 1e-7);
        }
        Err(e) => rec.errors.push(e.to_string()),
    }
    rec.finish(3, "lift independence", start)
}

// ---------------------------------------------------------------- 4

fn family_spread(m: &MetricSpec, seed: u64, a: ClassicalKind, b: ClassicalKind) -> Result<f64> {
    let (la, lb) = (classical_lift(a), classical_lift(b));
    max_of(map_seeded(50, seed, |rng| {
        let geo = PointGeometry::of_metric(m, &m.sample_tangent(rng))?;
        Ok(affine_coefficients_at(&la, &geo)?
            .a
            .sub(&affine_coefficients_at(&lb, &geo)?.a)
            .max_abs())
    }))
}

pub fn family_coincidence(seed: u64) -> CriterionReport {
    use ClassicalKind::*;
    let start = Instant::now();
    let mut rec = Recorder::default();
    let randers = MetricSpec::randers_default();
    rec.below("berwald vs hashiguchi on Randers", family_spread(&randers, seed, Berwald, Hashiguchi), 1e-12);
    rec.below("cartan vs chern-rund on Randers", family_spread(&randers, seed, Cartan, ChernRund), 1e-12);
    let funk = MetricSpec::funk(2);
    rec.above("berwald vs cartan on Funk (must differ)", family_spread(&funk, seed, Berwald, Cartan), 1e-3);
    rec.finish(4, "affine family coincidence", start)
}

// ---------------------------------------------------------------- 5

/// `R` with the sign of the `2 G^j G^i_jk` term flipped: a deliberately
/// wrong curvature used to check that the Jacobi comparison detects faults.
pub fn flipped_curvature(sd: &SprayData) -> Matrix {
    sd.curvature_matrix() - sd.berwald.contract_middle(&sd.g) * 4.0
}

/// Sup-norm distance between the integrated Jacobi field with `J(0) = 0`,
/// `DJ/dt(0) = u` and the geodesic-variation oracle on `grid`.
pub fn jacobi_distance(
    m: &MetricSpec,
    w0: &TangentVector,
    u: &Vector,
    grid: &[f64],
    curvature: Option<CurvatureModel<'_>>,
) -> Result<f64> {
    let geo = integrate_geodesic_on(m, w0, grid, &OdeOptions::default())?;
    let zero = Vector::zeros(m.dim());
    let j = match curvature {
        Some(c) => jacobi_integrate_with(m, &geo, &zero, u, c)?,
        None => jacobi_integrate(m, &geo, &zero, u)?,
    };
    j.distance(&jacobi_variation_field(m, w0, u, grid, 1e-3)?)
}

/// Random unit-speed starts paired with random unit directions.
pub fn jacobi_samples(m: &MetricSpec, count: usize, seed: u64) -> Vec<Result<(TangentVector, Vector)>> {
    map_seeded(count, seed, |rng| {
        let w = unit_tangent(m, rng)?;
        Ok((w, random_unit(rng, m.dim())))
    })
}

/// `max_t | |J(t)|_g - 2 sinh(t/2) |` for a Jacobi field of the Funk metric
/// with `J(0) = 0` and `DJ/dt(0)` a `g`-unit vector orthogonal to the start.
pub fn funk_profile_deviation(w0: &TangentVector, u: &Vector, grid: &[f64]) -> Result<f64> {
    let m = MetricSpec::funk(w0.dim());
    let g0 = fundamental_tensor(&m, w0)?;
    let mut e = u - &w0.y * (g0.apply(u, &w0.y) / g0.apply(&w0.y, &w0.y));
    e /= g0.apply(&e, &e).sqrt();
    let geo = integrate_geodesic_on(&m, w0, grid, &OdeOptions::default())?;
    let j = jacobi_integrate(&m, &geo, &Vector::zeros(w0.dim()), &e)?;
    let mut worst = 0.0f64;
    for (i, t) in grid.iter().enumerate() {
        let w = TangentVector::new(geo.points[i].clone(), geo.velocities[i].clone());
        let norm = fundamental_tensor(&m, &w)?.apply(&j.values[i], &j.values[i]).sqrt();
        worst = worst.max((norm - 2.0 * (t / 2.0).sinh()).abs());
    }
    Ok(worst)
}

pub fn jacobi_consistency(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut rec = Recorder::default();
    let grid = uniform_grid(0.0, 1.0, 101);
    for m in [
        MetricSpec::sphere(2),
        MetricSpec::hyperbolic(2),
        MetricSpec::randers_default(),
        MetricSpec::funk(2),
    ] {
        let d = jacobi_samples(&m, 10, seed)
            .into_iter()
            .map(|s| s.and_then(|(w, u)| jacobi_distance(&m, &w, &u, &grid, None)))
            .collect();
        rec.below(format!("{} Jacobi ODE vs variation oracle", m.name), max_of(d), 1e-3);
    }
    let funk = MetricSpec::funk(2);
    let d = jacobi_samples(&funk, 10, seed ^ 0xF)
        .into_iter()
        .map(|s| s.and_then(|(w, u)| funk_profile_deviation(&w, &u, &grid)))
        .collect();
    rec.below("funk |J| vs 2 sinh(t/2)", max_of(d), 1e-3);
    rec.finish(5, "Jacobi consistency", start)
}

// ---------------------------------------------------------------- 6

#[derive(Debug, Clone, Serialize)]
pub struct SecondVariationCase {
    pub name: String,
    pub formula: f64,
    pub finite_difference: f64,
    pub first_variation: f64,
    /// Closed-form value when one is known.
    pub expected: Option<f64>,
    /// Boundary terms `h^{P1}(V(0), V(0))` and `h^{P2}(V(1), V(1))`.
    pub boundary: Option<(f64, f64)>,
}

impl SecondVariationCase {
    pub fn relative_error(&self) -> f64 {
        (self.formula - self.finite_difference).abs() / self.finite_difference.abs().max(1e-12)
    }
}

pub const VARIATION_NODES: usize = 401;
const VARIATION_STEP: f64 = 1e-3;

fn evaluate_case(
    name: &str,
    m: &MetricSpec,
    geo: &Curve,
    v: &FieldAlongCurve,
    ends: (Option<Endpoint<'_>>, Option<Endpoint<'_>>),
    expected: Option<f64>,
) -> Result<SecondVariationCase> {
    let formula = second_variation_formula(m, geo, v, ends.0, ends.1)?;
    let fam = VariationFamily::linear(0.05, geo, v)?;
    Ok(SecondVariationCase {
        name: name.into(),
        formula,
        finite_difference: variation_energy_derivatives(m, &fam, 2, VARIATION_STEP)?,
        first_variation: variation_energy_derivatives(m, &fam, 1, VARIATION_STEP)?,
        expected,
        boundary: None,
    })
}

/// `λ(t) = (t, 0)` with `V = (0, sin πt)`; the exact value is `π²/2`.
pub fn euclidean_fixed_case() -> Result<SecondVariationCase> {
    let m = MetricSpec::euclidean(2);
    let geo = Curve::from_fn(
        0.0,
        1.0,
        VARIATION_NODES,
        |t| Vector::from_column_slice(&[t, 0.0]),
        |_| Vector::from_column_slice(&[1.0, 0.0]),
    )?;
    let v = FieldAlongCurve::from_fn(&geo.grid, |t| Vector::from_column_slice(&[0.0, (PI * t).sin()]))?;
    evaluate_case("euclidean-fixed", &m, &geo, &v, (None, None), Some(PI * PI / 2.0))
}

/// Geodesic on `[0, 1]` from `start` with `V = sin(πt) e(t)`, where `e` is
/// the parallel transport of `e0`. Both endpoints are held fixed.
pub fn fixed_endpoint_case(
    name: &str,
    m: &MetricSpec,
    start: &TangentVector,
    e0: &Vector,
    nodes: usize,
) -> Result<SecondVariationCase> {
    let grid = uniform_grid(0.0, 1.0, nodes);
    let geo = integrate_geodesic_on(m, start, &grid, &OdeOptions::default())?;
    let e = parallel_transport(m, &geo, e0)?;
    let v = FieldAlongCurve::new(
        grid.clone(),
        grid.iter().zip(&e.values).map(|(t, ei)| ei * (PI * t).sin()).collect(),
    )?;
    evaluate_case(name, m, &geo, &v, (None, None), None)
}

/// A great-circle arc of length `π/2` on the stereographic sphere with
/// `V = sin(πt) e(t)`, `e` a parallel unit normal; the exact value is
/// `∫ π² cos²(πt) - (π/2)² sin²(πt) dt = 3π²/8`.
pub fn sphere_fixed_case() -> Result<SecondVariationCase> {
    let start = TangentVector::from_slices(&[0.0, 0.0], &[PI / 4.0, 0.0]);
    let e0 = Vector::from_column_slice(&[0.0, 0.5]);
    let mut case = fixed_endpoint_case("sphere-fixed", &MetricSpec::sphere(2), &start, &e0, VARIATION_NODES)?;
    case.expected = Some(3.0 * PI * PI / 8.0);
    Ok(case)
}

/// A planar geodesic leaving the line `x0 + s d1` normally and ending on a
/// second line through its endpoint, chosen normal to the arriving geodesic.
/// The variation field is
/// `V = (1 - t) a d1 + t b d2 + c sin(πt) bump`,
/// tangent to the lines at both ends.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LineEndpoints {
    pub x0: [f64; 2],
    pub d1: [f64; 2],
    /// Starting guess for the normal direction at `x0`.
    pub normal_guess: [f64; 2],
    /// `F` of the initial velocity.
    pub speed: f64,
    /// `[a, b, c]`.
    pub coefficients: [f64; 3],
    pub bump: [f64; 2],
}

impl Default for LineEndpoints {
    fn default() -> Self {
        LineEndpoints {
            x0: [0.1, -0.2],
            d1: [1.0, 0.3],
            normal_guess: [-0.3, 1.0],
            speed: 0.8,
            coefficients: [0.7, -0.5, 0.3],
            bump: [0.2, 1.0],
        }
    }
}

pub fn line_endpoint_case(name: &str, m: &MetricSpec, cfg: &LineEndpoints, nodes: usize) -> Result<SecondVariationCase> {
    if m.dim() != 2 {
        return Err(finsler_core::FinslerError::Dimension(format!(
            "line endpoints need a planar metric, got dimension {}",
            m.dim()
        )));
    }
    let d1 = Vector::from_column_slice(&cfg.d1).normalize();
    let p1 = Submanifold::line(&cfg.x0, d1.as_slice());
    let origin = Vector::zeros(1);
    let eta = normal_cone_solve(&p1, &origin, m, &Vector::from_column_slice(&cfg.normal_guess))?;
    let grid = uniform_grid(0.0, 1.0, nodes);
    let w0 = TangentVector::new(eta.point.clone(), &eta.eta * cfg.speed);
    let geo = integrate_geodesic_on(m, &w0, &grid, &OdeOptions::default())?;
    let last = grid.len() - 1;
    let end = TangentVector::new(geo.points[last].clone(), geo.velocities[last].clone());
    let p = legendre_transform(m, &end)?;
    let d2 = Vector::from_column_slice(&[-p[1], p[0]]).normalize();
    let p2 = Submanifold::line(end.x.as_slice(), d2.as_slice());
    let bump = Vector::from_column_slice(&cfg.bump);
    let [a, b, c] = cfg.coefficients;
    let v = FieldAlongCurve::from_fn(&grid, |t| {
        &d1 * (a * (1.0 - t)) + &d2 * (b * t) + &bump * (c * (PI * t).sin())
    })?;
    let ends = (
        Some(Endpoint {
            manifold: &p1,
            param: &origin,
        }),
        Some(Endpoint {
            manifold: &p2,
            param: &origin,
        }),
    );
    let mut case = evaluate_case(name, m, &geo, &v, ends, None)?;
    let berwald = classical_lift(ClassicalKind::Berwald);
    let h = |p: &Submanifold, vel: &Vector, s: f64| -> Result<f64> {
        let n = NormalVector::checked(p, &origin, m, vel.clone(), 1e-6)?;
        let u = Vector::from_element(1, s);
        sff_connection(p, &n, &u, &u, m, &berwald)
    };
    case.boundary = Some((h(&p1, &geo.velocities[0], a)?, h(&p2, &end.y, b)?));
    Ok(case)
}

pub fn randers_lines_case() -> Result<SecondVariationCase> {
    line_endpoint_case(
        "randers-lines",
        &MetricSpec::randers_default(),
        &LineEndpoints::default(),
        VARIATION_NODES,
    )
}

pub fn second_variation(_seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut rec = Recorder::default();
    for case in [euclidean_fixed_case(), sphere_fixed_case(), randers_lines_case()] {
        match case {
            Ok(c) => {
                rec.below(format!("{} formula vs finite difference (relative)", c.name), Ok(c.relative_error()), 1e-3);
                rec.below(format!("{} first variation", c.name), Ok(c.first_variation.abs()), 1e-6);
                if let Some(x) = c.expected {
                    rec.below(
                        format!("{} formula vs closed form (relative)", c.name),
                        Ok((c.formula - x).abs() / x.abs()),
                        1e-3,
                    );
                }
                if let Some((h1, h2)) = c.boundary {
                    rec.above(format!("{} |h at start|", c.name), Ok(h1.abs()), 1e-4);
                    rec.above(format!("{} |h at end|", c.name), Ok(h2.abs()), 1e-4);
                }
            }
            Err(e) => rec.errors.push(e.to_string()),
        }
    }
    rec.finish(6, "second variation", start)
}

// ---------------------------------------------------------------- 7

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestSubmanifold {
    Circle,
    Line,
}

/// One random configuration: the submanifold, the solved normal and two
/// tangent vectors in parameter coordinates.
pub struct SffSample {
    pub manifold: Submanifold,
    pub eta: NormalVector,
    pub u: Vector,
    pub v: Vector,
}

pub fn sff_sample(m: &MetricSpec, kind: TestSubmanifold, rng: &mut SampleRng) -> Result<SffSample> {
    let jitter = random_unit(rng, 2) * 0.2;
    let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let (manifold, param, normal) = match kind {
        TestSubmanifold::Circle => {
            let c = random_unit(rng, 2) * rng.random_range(0.0..0.2);
            let r = rng.random_range(0.3..0.6);
            let th = rng.random_range(0.0..2.0 * PI);
            let normal = Vector::from_column_slice(&[th.cos(), th.sin()]);
            (Submanifold::circle(c.as_slice(), r), Vector::from_element(1, th), normal)
        }
        TestSubmanifold::Line => {
            let p = random_unit(rng, 2) * rng.random_range(0.0..0.3);
            let d = random_unit(rng, 2);
            let normal = Vector::from_column_slice(&[-d[1], d[0]]);
            let t = rng.random_range(-0.2..0.2);
            (Submanifold::line(p.as_slice(), d.as_slice()), Vector::from_element(1, t), normal)
        }
    };
    let eta = normal_cone_solve(&manifold, &param, m, &(normal * side + jitter))?;
    let u = Vector::from_element(1, rng.random_range(-1.0..1.0));
    let v = Vector::from_element(1, rng.random_range(-1.0..1.0));
    Ok(SffSample { manifold, eta, u, v })
}

/// `[|b - h|, Lagrangean residual, spread of h over the classical lifts]`.
pub fn sff_residuals(m: &MetricSpec, s: &SffSample) -> Result<[f64; 3]> {
    let berwald = classical_lift(ClassicalKind::Berwald);
    let h = sff_connection(&s.manifold, &s.eta, &s.u, &s.v, m, &berwald)?;
    let b = sff_symplectic(&s.manifold, &s.eta, &s.u, &s.v, m, 1e-4)?;
    let basis = normal_bundle_tangent_basis(&s.manifold, &s.eta, m, 1e-4)?;
    let lag = lagrangian_residual(m, &s.eta, &basis)?;
    let mut spread = 0.0f64;
    for kind in ClassicalKind::ALL {
        let hk = sff_connection(&s.manifold, &s.eta, &s.u, &s.v, m, &classical_lift(kind))?;
        spread = spread.max((hk - h).abs());
    }
    Ok([(b - h).abs(), lag, spread])
}

pub fn sff_agreement(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut rec = Recorder::default();
    for m in [MetricSpec::euclidean(2), MetricSpec::randers_default()] {
        for kind in [TestSubmanifold::Circle, TestSubmanifold::Line] {
            let r = max_each(map_seeded(20, seed, |rng| sff_residuals(&m, &sff_sample(&m, kind, rng)?)));
            let tag = format!("{} {:?}", m.name, kind).to_lowercase();
            match r {
                Ok([diff, lag, spread]) => {
                    rec.below(format!("{tag} |b - h|"), Ok(diff), 1e-5);
                    rec.below(format!("{tag} Lagrangean residual"), Ok(lag), 1e-6);
                    rec.below(format!("{tag} h spread over classical lifts"), Ok(spread), 1e-8);
                }
                Err(e) => rec.errors.push(format!("{tag}: {e}")),
            }
        }
    }
    rec.finish(7, "symplectic second fundamental form", start)
}

// ---------------------------------------------------------------- 8

/// Smooth test vector fields on the plane, evaluated generically so their
/// Jacobians come from jets.
#[derive(Debug, Clone, Copy)]
enum TestField {
    W,
    U,
    V,
    T,
}

impl TestField {
    fn eval<S: Scalar>(self, x: &[S]) -> Vec<S> {
        let (a, b) = (x[0].clone(), x[1].clone());
        match self {
            TestField::W => vec![a.clone() * 0.3 + 1.0 - b.clone() * b.clone() * 0.2, a * b * 0.4 + 0.5],
            TestField::U => vec![b * 0.5 - 0.7, a.clone() * a * 0.3 + 1.0],
            TestField::V => vec![a.clone() * b.clone() + 0.2, b * 0.1 - a * 0.6 + 0.4],
            TestField::T => vec![(a * 2.0).sin() * 0.3 + 0.8, b.cos() * 0.5],
        }
    }

    fn at(self, x: &Vector) -> Vector {
        Vector::from_vec(self.eval(x.as_slice()))
    }

    fn jacobian(self, x: &Vector) -> Matrix {
        let jets = self.eval(&Jet::variables(x.as_slice(), 1));
        Matrix::from_fn(2, 2, |i, k| jets[i].derivative(&[k]).expect("order-1 jet"))
    }
}

/// `g_{W(x)}(P(x), Q(x))` as a function of the base point.
fn pairing(m: &MetricSpec, w: TestField, p: TestField, q: TestField, x: &Vector) -> Result<Vector> {
    let g = fundamental_tensor(m, &TangentVector::new(x.clone(), w.at(x)))?;
    Ok(Vector::from_element(1, g.apply(&p.at(x), &q.at(x))))
}

const FD_STEP: f64 = 1e-3;

/// Residuals of the torsion-free symmetry, the compatibility of `D^W` with
/// `g_W`, and the `D^W g_W` formula of each affine family, at one point.
fn field_identities(m: &MetricSpec, x: &Vector) -> Result<[f64; 3]> {
    use TestField::*;
    let w = TangentVector::new(x.clone(), W.at(x));
    let geo = PointGeometry::of_metric(m, &w)?;
    let g = fundamental_tensor(m, &w)?;
    let c = cartan_tensor(m, &w)?;
    let cp = cprime_tensor(m, &w)?;
    let (u, v, t, wv) = (U.at(x), V.at(x), T.at(x), W.at(x));
    let (ju, jv, jt, jw) = (U.jacobian(x), V.jacobian(x), T.jacobian(x), W.jacobian(x));
    let u_g_wv = oracle::directional(|p| pairing(m, W, W, V, p), x, &u, FD_STEP)?[0];
    let u_g_tv = oracle::directional(|p| pairing(m, W, T, V, p), x, &u, FD_STEP)?[0];
    let (mut sym, mut compat, mut thm) = (0.0f64, 0.0f64, 0.0f64);
    for kind in ClassicalKind::ALL {
        let a = affine_coefficients_at(&classical_lift(kind), &geo)?;
        let d = |jac: &Matrix, dir: &Vector, field: &Vector| jac * dir + a.apply(dir, field);
        // D_U V − D_V U = [U, V]
        let bracket = &jv * &u - &ju * &v;
        sym = sym.max((d(&jv, &u, &v) - d(&ju, &v, &u) - bracket).amax());
        // U g_W(W, V) = g_W(D_U W, V) + g_W(W, D_U V)
        let duw = d(&jw, &u, &wv);
        let rhs = g.apply(&duw, &v) + g.apply(&wv, &d(&jv, &u, &v));
        compat = compat.max((u_g_wv - rhs).abs());
        // (D_U g_W)(T, V) = 2 C_W(D_U W, T, V) [+ 2 C′_W(U, T, V)]
        let lhs = u_g_tv - g.apply(&d(&jt, &u, &t), &v) - g.apply(&t, &d(&jv, &u, &v));
        let mut rhs = 2.0 * c.apply(&duw, &t, &v);
        if matches!(kind, ClassicalKind::Berwald | ClassicalKind::Hashiguchi) {
            rhs += 2.0 * cp.apply(&u, &t, &v);
        }
        thm = thm.max((lhs - rhs).abs());
    }
    Ok([sym, compat, thm])
}

/// Residual of `D^T U/dt = D^T T/ds` for the two-parameter family
/// `H(s, t)` below, at `s = 0` and the given `t0`.
fn family_symmetry(m: &MetricSpec, lift: &LiftSpec, t0: f64) -> Result<f64> {
    let h = |s: f64, t: f64| Vector::from_column_slice(&[0.1 + 0.6 * t + 0.2 * s * t.cos(), -0.2 + 0.3 * t.sin() + s * (0.5 + 0.3 * t * t)]);
    let dt = |s: f64, t: f64| Vector::from_column_slice(&[0.6 - 0.2 * s * t.sin(), 0.3 * t.cos() + 0.6 * s * t]);
    let ds = |_s: f64, t: f64| Vector::from_column_slice(&[0.2 * t.cos(), 0.5 + 0.3 * t * t]);
    let half = 0.05;
    let mid = 10;
    let t_curve = Curve::from_fn(t0 - half, t0 + half, 2 * mid + 1, |t| h(0.0, t), |t| dt(0.0, t))?;
    let tw = FieldAlongCurve::from_fn(&t_curve.grid, |t| dt(0.0, t))?;
    let uv = FieldAlongCurve::from_fn(&t_curve.grid, |t| ds(0.0, t))?;
    let d_u_dt = covariant_derivative_curve(lift, m, &t_curve, &tw, &uv)?;
    let s_curve = Curve::from_fn(-half, half, 2 * mid + 1, |s| h(s, t0), |s| ds(s, t0))?;
    let sw = FieldAlongCurve::from_fn(&s_curve.grid, |s| dt(s, t0))?;
    let d_t_ds = covariant_derivative_curve(lift, m, &s_curve, &sw, &sw)?;
    Ok((&d_u_dt.values[mid] - &d_t_ds.values[mid]).amax())
}

pub fn identity_suite(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut rec = Recorder::default();
    let randers = MetricSpec::randers_default();
    let funk = MetricSpec::funk(2);

    let contractions = |m: &MetricSpec| {
        max_of(map_seeded(50, seed, |rng| {
            let w = m.sample_tangent(rng);
            let c = cartan_tensor(m, &w)?.c;
            let cp = cprime_tensor(m, &w)?.cp;
            Ok(c.contract_last(&w.y).amax().max(cp.contract_last(&w.y).amax()))
        }))
    };
    rec.below("randers C(.,.,w) and C'(.,.,w)", contractions(&randers), 1e-9);
    rec.below("funk C(.,.,w) and C'(.,.,w)", contractions(&funk), 1e-9);

    for m in [
        MetricSpec::euclidean(3),
        MetricSpec::sphere(2),
        MetricSpec::hyperbolic(2),
        randers.clone(),
        funk.clone(),
    ] {
        let report = check_metric(&m, 100, seed);
        let r = if report.passed(1e-10) || report.errors.is_empty() && report.not_positive_definite.is_empty() {
            Ok(report.identity_residual)
        } else {
            Err(finsler_core::FinslerError::Domain(format!("{} failed validation: {report:?}", m.name)))
        };
        rec.below(format!("{} |F^2 - g_w(w,w)|", m.name), r, 1e-10);
    }

    for m in [&randers, &funk] {
        let r = max_of(map_seeded(50, seed, |rng| {
            let geo = PointGeometry::of_metric(m, &m.sample_tangent(rng))?;
            let s = geo.spray.spray_vector();
            ClassicalKind::ALL.iter().try_fold(0.0f64, |acc, &kind| {
                let k = LiftCoefficients::new(&classical_lift(kind), &geo)?;
                Ok(acc.max(k.nabla_g_along(&geo, &s)?.amax()))
            })
        }));
        rec.below(format!("{} nabla_S g over classical lifts", m.name), r, 1e-7);
    }

    let r = max_each(map_seeded(25, seed, |rng| {
        let x = random_unit(rng, 2) * rng.random_range(0.0..0.4);
        field_identities(&randers, &x)
    }));
    match r {
        Ok([sym, compat, thm]) => {
            rec.below("symmetry D_U V - D_V U = [U,V]", Ok(sym), 1e-6);
            rec.below("metric compatibility along U", Ok(compat), 1e-6);
            rec.below("D_U g_W identities of both families", Ok(thm), 1e-6);
        }
        Err(e) => rec.errors.push(format!("field identities: {e}")),
    }

    let mut lifts: Vec<LiftSpec> = ClassicalKind::ALL.iter().map(|&k| classical_lift(k)).collect();
    lifts.push(random_lift(
        2,
        seed.wrapping_add(300),
        RandomLiftOptions {
            t1: true,
            ..Default::default()
        },
    ));
    let r = lifts.iter().try_fold(0.0f64, |acc, lift| {
        [0.2, 0.5, 0.8]
            .iter()
            .try_fold(acc, |a, &t0| Ok(a.max(family_symmetry(&randers, lift, t0)?)))
    });
    rec.below("variation symmetry D^T U/dt = D^T T/ds", r, 1e-6);
    rec.finish(8, "identity suite", start)
}

// ---------------------------------------------------------------- 9

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub criteria: Vec<CriterionReport>,
    pub seconds: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(CriterionReport::passed)
    }
}

pub type CriterionFn = fn(u64) -> CriterionReport;

/// Criteria 1 through 8 in order.
pub const CRITERIA: [CriterionFn; 8] = [
    riemannian_reduction,
    condition_matrix,
    lift_independence,
    family_coincidence,
    jacobi_consistency,
    second_variation,
    sff_agreement,
    identity_suite,
];

/// Runs criteria 1 to 8, then criterion 9: total runtime under five minutes
/// and bitwise reproducibility of a rerun of criterion 3 (a parallel sweep).
pub fn verify_all(seed: u64) -> SuiteReport {
    let start = Instant::now();
    let mut criteria: Vec<CriterionReport> = CRITERIA.iter().map(|f| f(seed)).collect();
    let t9 = Instant::now();
    let mut rec = Recorder::default();
    rec.below("suite runtime [s]", Ok(start.elapsed().as_secs_f64()), 300.0);
    let rerun = lift_independence(seed);
    let first = &criteria[2];
    let identical = rerun.measurements.len() == first.measurements.len()
        && rerun
            .measurements
            .iter()
            .zip(&first.measurements)
            .all(|(a, b)| a.value.to_bits() == b.value.to_bits());
    rec.below("rerun mismatches", Ok(if identical { 0.0 } else { 1.0 }), 0.5);
    criteria.push(rec.finish(9, "runtime and determinism", t9));
    SuiteReport {
        seed,
        criteria,
        seconds: start.elapsed().as_secs_f64(),
    }
}
