//! Scenario tasks. Each task turns a metric and its parameter block into a
//! CSV table plus a list of threshold checks.

use std::collections::BTreeMap;

use finsler_core::connections::{check_conditions, classical_lift, ClassicalKind, Condition};
use finsler_core::curve::uniform_grid;
use finsler_core::metric::{check_metric, metric_value, random_unit, MetricSpec, TangentVector};
use finsler_core::ode::OdeOptions;
use finsler_core::spray::{flag_curvature, SprayData};
use finsler_core::submanifold::{lagrangian_residual, normal_bundle_tangent_basis, sff_connection, sff_symplectic};
use finsler_core::sweep::map_seeded;
use finsler_core::tensor::{Matrix, Vector};
use finsler_core::variational::integrate_geodesic_on;
use finsler_core::FinslerError;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::csv::{indexed, num, nums, CsvTable};
use crate::error::CliError;
use crate::scenario::{parameters, TaskKind};
use crate::suite::{
    characterizing_conditions, fixed_endpoint_case, flipped_curvature, jacobi_distance, jacobi_samples,
    line_endpoint_case, sff_sample, Bound, LiftFamily, LineEndpoints, Measurement, SecondVariationCase,
    TestSubmanifold, VARIATION_NODES,
};

/// Result of one task: the table to write and the checks deciding the exit
/// status.
#[derive(Debug, Clone)]
pub struct TaskOutput {
    pub table: CsvTable,
    pub checks: Vec<Measurement>,
}

impl TaskOutput {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Measurement::ok)
    }

    fn check(&mut self, label: impl Into<String>, value: f64, threshold: f64, bound: Bound) {
        self.checks.push(Measurement {
            label: label.into(),
            value,
            threshold,
            bound,
        });
    }
}

fn require_positive(source: &str, field: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(source, format!("field `parameters.{field}`: must be positive, got {x}")))
    }
}

fn require_dim(source: &str, m: &MetricSpec, what: &str, dim: usize) -> Result<(), CliError> {
    if m.dim() == dim {
        Ok(())
    } else {
        Err(CliError::config(
            source,
            format!("field `metric`: {what} needs dimension {dim}, the metric has {}", m.dim()),
        ))
    }
}

fn require_len(source: &str, field: &str, v: &[f64], dim: usize) -> Result<(), CliError> {
    if v.len() == dim {
        Ok(())
    } else {
        Err(CliError::config(
            source,
            format!("field `parameters.{field}`: expected {dim} components, got {}", v.len()),
        ))
    }
}

fn first_error<T>(results: Vec<finsler_core::Result<T>>) -> Result<Vec<T>, CliError> {
    Ok(results.into_iter().collect::<finsler_core::Result<Vec<T>>>()?)
}

/// Runs `task` on `m`; `source` names the scenario in diagnostics.
pub fn run_task(task: TaskKind, m: &MetricSpec, params: &Value, source: &str) -> Result<TaskOutput, CliError> {
    let mut out = match task {
        TaskKind::CheckMetric => check_metric_task(m, &parameters(params, source)?, source),
        TaskKind::ConditionMatrix => condition_matrix_task(m, &parameters(params, source)?, source),
        TaskKind::CurvatureSweep => curvature_sweep_task(m, &parameters(params, source)?, source),
        TaskKind::Geodesic => geodesic_task(m, &parameters(params, source)?, source),
        TaskKind::JacobiCompare => jacobi_compare_task(m, &parameters(params, source)?, source),
        TaskKind::SecondVariation => second_variation_task(m, &parameters(params, source)?, source),
        TaskKind::SffCompare => sff_compare_task(m, &parameters(params, source)?, source),
        TaskKind::LiftIndependence => lift_independence_task(m, &parameters(params, source)?, source),
    }?;
    let mut meta = vec![("task".to_string(), task.name().to_string()), ("metric".into(), m.name.clone())];
    meta.append(&mut out.table.metadata);
    out.table.metadata = meta;
    Ok(out)
}

fn with_params<P: Serialize>(table: &mut CsvTable, p: &P) {
    let json = serde_json::to_string(p).expect("parameter structs serialize");
    table.meta("parameters", json);
}

// ------------------------------------------------------------ check-metric

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckMetricParams {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for CheckMetricParams {
    fn default() -> Self {
        CheckMetricParams {
            samples: 100,
            seed: 0,
            tolerance: 1e-10,
        }
    }
}

fn check_metric_task(m: &MetricSpec, p: &CheckMetricParams, source: &str) -> Result<TaskOutput, CliError> {
    require_positive(source, "tolerance", p.tolerance)?;
    let r = check_metric(m, p.samples, p.seed);
    if let Some(e) = r.errors.first() {
        return Err(FinslerError::Domain(e.clone()).into());
    }
    let mut table = CsvTable::new(["quantity", "value", "tolerance"]);
    with_params(&mut table, p);
    let npd = r.not_positive_definite.len() as f64;
    let rows = [
        ("homogeneity_residual", r.homogeneity_residual, p.tolerance),
        ("identity_residual", r.identity_residual, p.tolerance),
        ("not_positive_definite", npd, 1.0),
    ];
    let mut out = TaskOutput {
        table,
        checks: Vec::new(),
    };
    for (name, value, tol) in rows {
        out.table.push(vec![name.into(), num(value), num(tol)]);
        out.check(name, value, tol, Bound::Below);
    }
    Ok(out)
}

// -------------------------------------------------------- condition-matrix

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConditionMatrixParams {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Classical connections to tabulate, by name.
    pub lifts: Vec<String>,
    /// Conditions each lift must satisfy. Defaults to the characterising
    /// set of each classical connection.
    pub expect: Option<BTreeMap<String, Vec<String>>>,
    /// Conditions each lift must violate by more than `discrimination`.
    pub reject: BTreeMap<String, Vec<String>>,
    pub discrimination: f64,
}

impl Default for ConditionMatrixParams {
    fn default() -> Self {
        ConditionMatrixParams {
            samples: 50,
            seed: 0,
            tolerance: 1e-7,
            lifts: ClassicalKind::ALL.iter().map(|k| k.name().to_string()).collect(),
            expect: None,
            reject: BTreeMap::new(),
            discrimination: 1e-3,
        }
    }
}

fn parse_conditions(
    source: &str,
    field: &str,
    map: &BTreeMap<String, Vec<String>>,
    lifts: &[ClassicalKind],
) -> Result<Vec<(ClassicalKind, Vec<Condition>)>, CliError> {
    map.iter()
        .map(|(lift, conds)| {
            let kind: ClassicalKind = lift
                .parse()
                .map_err(|e| CliError::config(source, format!("field `parameters.{field}.{lift}`: {e}")))?;
            if !lifts.contains(&kind) {
                return Err(CliError::config(
                    source,
                    format!("field `parameters.{field}.{lift}`: lift is not listed in `parameters.lifts`"),
                ));
            }
            let conds = conds
                .iter()
                .map(|c| {
                    c.parse::<Condition>()
                        .map_err(|e| CliError::config(source, format!("field `parameters.{field}.{lift}`: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok((kind, conds))
        })
        .collect()
}

fn condition_matrix_task(m: &MetricSpec, p: &ConditionMatrixParams, source: &str) -> Result<TaskOutput, CliError> {
    require_positive(source, "tolerance", p.tolerance)?;
    require_positive(source, "discrimination", p.discrimination)?;
    let lifts = p
        .lifts
        .iter()
        .enumerate()
        .map(|(i, name)| {
            name.parse::<ClassicalKind>()
                .map_err(|e| CliError::config(source, format!("field `parameters.lifts[{i}]`: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let expect = match &p.expect {
        Some(map) => parse_conditions(source, "expect", map, &lifts)?,
        None => lifts
            .iter()
            .map(|&k| (k, characterizing_conditions(k).to_vec()))
            .collect(),
    };
    let reject = parse_conditions(source, "reject", &p.reject, &lifts)?;

    let mut table = CsvTable::new(std::iter::once("lift".to_string()).chain(Condition::ALL.iter().map(|c| c.to_string())));
    with_params(&mut table, p);
    table.meta("seed", p.seed).meta("tolerance", num(p.tolerance));
    let mut out = TaskOutput {
        table,
        checks: Vec::new(),
    };
    let mut reports = BTreeMap::new();
    for &kind in &lifts {
        let report = check_conditions(&classical_lift(kind), m, &Condition::ALL, p.samples, p.seed);
        if let Some(e) = report.errors.first() {
            return Err(FinslerError::Domain(format!("{kind}: {e}")).into());
        }
        let mut row = vec![kind.to_string()];
        row.extend(report.residuals.iter().map(|(_, r)| num(*r)));
        out.table.push(row);
        reports.insert(kind, report);
    }
    for (kind, conds) in &expect {
        for &c in conds {
            let r = reports[kind].residual(c).expect("all conditions evaluated");
            out.check(format!("{kind} {c}"), r, p.tolerance, Bound::Below);
        }
    }
    for (kind, conds) in &reject {
        for &c in conds {
            let r = reports[kind].residual(c).expect("all conditions evaluated");
            out.check(format!("{kind} {c} (must fail)"), r, p.discrimination, Bound::Above);
        }
    }
    Ok(out)
}

/// Conditions below `tol` for each row of a condition-matrix table.
pub fn satisfied_conditions(table: &CsvTable, tol: f64) -> Vec<(String, Vec<String>)> {
    table
        .rows
        .iter()
        .map(|row| {
            let held = row[1..]
                .iter()
                .zip(&table.header[1..])
                .filter(|(v, _)| v.parse::<f64>().is_ok_and(|v| v < tol))
                .map(|(_, c)| c.clone())
                .collect();
            (row[0].clone(), held)
        })
        .collect()
}

// --------------------------------------------------------- curvature-sweep

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurvatureSweepParams {
    pub samples: usize,
    pub seed: u64,
    /// When set, every flag curvature must lie within `tolerance` of it.
    pub expected: Option<f64>,
    pub tolerance: f64,
}

impl Default for CurvatureSweepParams {
    fn default() -> Self {
        CurvatureSweepParams {
            samples: 100,
            seed: 0,
            expected: None,
            tolerance: 1e-4,
        }
    }
}

fn curvature_sweep_task(m: &MetricSpec, p: &CurvatureSweepParams, source: &str) -> Result<TaskOutput, CliError> {
    require_positive(source, "tolerance", p.tolerance)?;
    if m.dim() < 2 {
        return Err(CliError::config(source, "field `metric`: flags need dimension at least 2"));
    }
    let n = m.dim();
    let samples = first_error(map_seeded(p.samples, p.seed, |rng| {
        let w = m.sample_tangent(rng);
        let u = random_unit(rng, n);
        let k = flag_curvature(m, &w, &u)?;
        Ok((w, u, k))
    }))?;
    let header = std::iter::once("sample".to_string())
        .chain(indexed("x", n))
        .chain(indexed("y", n))
        .chain(indexed("u", n))
        .chain(std::iter::once("K".to_string()));
    let mut table = CsvTable::new(header);
    with_params(&mut table, p);
    table.meta("seed", p.seed);
    let mut worst = 0.0f64;
    for (i, (w, u, k)) in samples.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(nums(w.x.iter()).chain(nums(w.y.iter())).chain(nums(u.iter())));
        row.push(num(*k));
        table.push(row);
        if let Some(e) = p.expected {
            worst = worst.max((k - e).abs());
        }
    }
    let mut out = TaskOutput {
        table,
        checks: Vec::new(),
    };
    if let Some(e) = p.expected {
        out.check(format!("max |K - ({e})|"), worst, p.tolerance, Bound::Below);
    }
    Ok(out)
}

// ---------------------------------------------------------------- geodesic

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeodesicParams {
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
    pub t_end: f64,
    pub nodes: usize,
    /// Bound on the drift of `F(λ̇)` along the computed curve.
    pub tolerance: f64,
}

impl Default for GeodesicParams {
    fn default() -> Self {
        GeodesicParams {
            x0: vec![0.0, 0.0],
            y0: vec![1.0, 0.0],
            t_end: 1.0,
            nodes: VARIATION_NODES,
            tolerance: 1e-7,
        }
    }
}

/// Integrates the geodesic and tabulates `t, x^i, y^i, F`. Also returns the
/// maximal deviation of `F(λ̇)` from its initial value.
pub fn geodesic_table(m: &MetricSpec, p: &GeodesicParams) -> finsler_core::Result<(CsvTable, f64)> {
    let n = m.dim();
    let w0 = TangentVector::from_slices(&p.x0, &p.y0);
    let grid = uniform_grid(0.0, p.t_end, p.nodes);
    let curve = integrate_geodesic_on(m, &w0, &grid, &OdeOptions::default())?;
    let header = std::iter::once("t".to_string())
        .chain(indexed("x", n))
        .chain(indexed("y", n))
        .chain(std::iter::once("F".to_string()));
    let mut table = CsvTable::new(header);
    let f0 = metric_value(m, &w0)?;
    let mut drift = 0.0f64;
    for ((t, x), y) in curve.grid.iter().zip(&curve.points).zip(&curve.velocities) {
        let f = metric_value(m, &TangentVector::new(x.clone(), y.clone()))?;
        drift = drift.max((f - f0).abs());
        let mut row = vec![num(*t)];
        row.extend(nums(x.iter()).chain(nums(y.iter())));
        row.push(num(f));
        table.push(row);
    }
    Ok((table, drift))
}

fn geodesic_task(m: &MetricSpec, p: &GeodesicParams, source: &str) -> Result<TaskOutput, CliError> {
    require_len(source, "x0", &p.x0, m.dim())?;
    require_len(source, "y0", &p.y0, m.dim())?;
    require_positive(source, "t_end", p.t_end)?;
    require_positive(source, "tolerance", p.tolerance)?;
    if p.nodes < 2 {
        return Err(CliError::config(source, "field `parameters.nodes`: need at least 2 nodes"));
    }
    let (mut table, drift) = geodesic_table(m, p)?;
    with_params(&mut table, p);
    let mut out = TaskOutput {
        table,
        checks: Vec::new(),
    };
    out.check("speed drift max |F(t) - F(0)|", drift, p.tolerance, Bound::Below);
    Ok(out)
}

// ---------------------------------------------------------- jacobi-compare

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JacobiCompareParams {
    pub samples: usize,
    pub seed: u64,
    pub nodes: usize,
    pub tolerance: f64,
    /// Integrate with a deliberately corrupted curvature term.
    pub fault: bool,
}

impl Default for JacobiCompareParams {
    fn default() -> Self {
        JacobiCompareParams {
            samples: 10,
            seed: 0,
            nodes: 101,
            tolerance: 1e-3,
            fault: false,
        }
    }
}

fn jacobi_compare_task(m: &MetricSpec, p: &JacobiCompareParams, source: &str) -> Result<TaskOutput, CliError> {
    require_positive(source, "tolerance", p.tolerance)?;
    if p.nodes < 5 {
        return Err(CliError::config(source, "field `parameters.nodes`: need at least 5 nodes"));
    }
    let n = m.dim();
    let grid = uniform_grid(0.0, 1.0, p.nodes);
    let flipped = |sd: &SprayData| -> Matrix { flipped_curvature(sd) };
    let model = p.fault.then_some(&flipped as &(dyn Fn(&SprayData) -> Matrix + Sync));
    let rows = first_error(
        jacobi_samples(m, p.samples, p.seed)
            .into_iter()
            .map(|s| {
                let (w, u) = s?;
                let d = jacobi_distance(m, &w, &u, &grid, model)?;
                Ok((w, u, d))
            })
            .collect(),
    )?;
    let header = std::iter::once("sample".to_string())
        .chain(indexed("x", n))
        .chain(indexed("y", n))
        .chain(indexed("u", n))
        .chain(std::iter::once("sup_distance".to_string()));
    let mut table = CsvTable::new(header);
    with_params(&mut table, p);
    table.meta("seed", p.seed);
    let mut worst = 0.0f64;
    for (i, (w, u, d)) in rows.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(nums(w.x.iter()).chain(nums(w.y.iter())).chain(nums(u.iter())));
        row.push(num(*d));
        table.push(row);
        worst = worst.max(*d);
    }
    let mut out = TaskOutput {
        table,
        checks: Vec::new(),
    };
    out.check("max sup-norm distance", worst, p.tolerance, Bound::Below);
    Ok(out)
}

// -------------------------------------------------------- second-variation

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedEndpointParams {
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
    /// Initial value of the parallel field `e` in `V = sin(πt) e`.
    pub e0: Vec<f64>,
    #[serde(default)]
    pub expected: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VariationSetup {
    FixedEndpoints(FixedEndpointParams),
    LineEndpoints(LineEndpointParams),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineEndpointParams {
    #[serde(default)]
    pub configuration: LineEndpoints,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecondVariationParams {
    pub setup: VariationSetup,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    /// Relative tolerance between the formula and the finite difference.
    #[serde(default = "default_relative")]
    pub tolerance: f64,
    #[serde(default = "default_first_variation")]
    pub first_variation_tolerance: f64,
}

fn default_nodes() -> usize {
    VARIATION_NODES
}

fn default_relative() -> f64 {
    1e-3
}

fn default_first_variation() -> f64 {
    1e-6
}

impl Default for SecondVariationParams {
    fn default() -> Self {
        SecondVariationParams {
            setup: VariationSetup::LineEndpoints(LineEndpointParams::default()),
            nodes: default_nodes(),
            tolerance: default_relative(),
            first_variation_tolerance: default_first_variation(),
        }
    }
}

fn second_variation_task(m: &MetricSpec, p: &SecondVariationParams, source: &str) -> Result<TaskOutput, CliError> {
    require_positive(source, "tolerance", p.tolerance)?;
    require_positive(source, "first_variation_tolerance", p.first_variation_tolerance)?;
    if p.nodes < 101 {
        return Err(CliError::config(source, "field `parameters.nodes`: need at least 101 nodes"));
    }
    let case: SecondVariationCase = match &p.setup {
        VariationSetup::FixedEndpoints(f) => {
            for (field, v) in [("x0", &f.x0), ("y0", &f.y0), ("e0", &f.e0)] {
                require_len(source, &format!("setup.{field}"), v, m.dim())?;
            }
            let start = TangentVector::from_slices(&f.x0, &f.y0);
            let mut case = fixed_endpoint_case("fixed-endpoints", m, &start, &Vector::from_column_slice(&f.e0), p.nodes)?;
            case.expected = f.expected;
            case
        }
        VariationSetup::LineEndpoints(l) => {
            require_dim(source, m, "line endpoints", 2)?;
            line_endpoint_case("line-endpoints", m, &l.configuration, p.nodes)?
        }
    };
    let mut table = CsvTable::new([
        "case",
        "formula",
        "finite_difference",
        "relative_error",
        "first_variation",
        "h_start",
        "h_end",
    ]);
    with_params(&mut table, p);
    let (h1, h2) = case.boundary.unwrap_or((0.0, 0.0));
    table.push(vec![
        case.name.clone(),
        num(case.formula),
        num(case.finite_difference),
        num(case.relative_error()),
        num(case.first_variation),
        num(h1),
        num(h2),
    ]);
    let mut out = TaskOutput {
        table,
        checks: Vec::new(),
    };
    out.check("formula vs finite difference (relative)", case.relative_error(), p.tolerance, Bound::Below);
    out.check("|first variation|", case.first_variation.abs(), p.first_variation_tolerance, Bound::Below);
    if let Some(x) = case.expected {
        out.check(
            "formula vs expected (relative)",
            (case.formula - x).abs() / x.abs().max(1e-12),
            p.tolerance,
            Bound::Below,
        );
    }
    Ok(out)
}

// ------------------------------------------------------------- sff-compare

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SffCompareParams {
    pub submanifold: TestSubmanifold,
    pub samples: usize,
    pub seed: u64,
    /// Finite-difference step for the normal-bundle tangent basis.
    pub step: f64,
    pub tolerance: f64,
    pub lagrangian_tolerance: f64,
}

impl Default for SffCompareParams {
    fn default() -> Self {
        SffCompareParams {
            submanifold: TestSubmanifold::Circle,
            samples: 20,
            seed: 0,
            step: 1e-4,
            tolerance: 1e-5,
            lagrangian_tolerance: 1e-6,
        }
    }
}

fn sff_compare_task(m: &MetricSpec, p: &SffCompareParams, source: &str) -> Result<TaskOutput, CliError> {
    require_dim(source, m, "sff-compare", 2)?;
    require_positive(source, "step", p.step)?;
    require_positive(source, "tolerance", p.tolerance)?;
    require_positive(source, "lagrangian_tolerance", p.lagrangian_tolerance)?;
    let berwald = classical_lift(ClassicalKind::Berwald);
    let rows = first_error(map_seeded(p.samples, p.seed, |rng| {
        let s = sff_sample(m, p.submanifold, rng)?;
        let h = sff_connection(&s.manifold, &s.eta, &s.u, &s.v, m, &berwald)?;
        let b = sff_symplectic(&s.manifold, &s.eta, &s.u, &s.v, m, p.step)?;
        let basis = normal_bundle_tangent_basis(&s.manifold, &s.eta, m, p.step)?;
        let lag = lagrangian_residual(m, &s.eta, &basis)?;
        Ok((s, h, b, lag))
    }))?;
    let mut table = CsvTable::new(["sample", "x1", "x2", "eta1", "eta2", "u", "v", "h", "b", "abs_diff", "lagrangian"]);
    with_params(&mut table, p);
    table.meta("seed", p.seed);
    let (mut diff, mut lag_max) = (0.0f64, 0.0f64);
    for (i, (s, h, b, lag)) in rows.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(nums(s.eta.point.iter()).chain(nums(s.eta.eta.iter())));
        row.extend([num(s.u[0]), num(s.v[0]), num(*h), num(*b), num((b - h).abs()), num(*lag)]);
        table.push(row);
        diff = diff.max((b - h).abs());
        lag_max = lag_max.max(*lag);
    }
    let mut out = TaskOutput {
        table,
        checks: Vec::new(),
    };
    out.check("max |b - h|", diff, p.tolerance, Bound::Below);
    out.check("max Lagrangean residual", lag_max, p.lagrangian_tolerance, Bound::Below);
    Ok(out)
}

// ------------------------------------------------------- lift-independence

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LiftIndependenceParams {
    pub samples: usize,
    pub seed: u64,
    /// Number of random lifts of each kind (with and without T1).
    pub random_lifts: u64,
    pub tolerance: f64,
}

impl Default for LiftIndependenceParams {
    fn default() -> Self {
        LiftIndependenceParams {
            samples: 25,
            seed: 0,
            random_lifts: 5,
            tolerance: 1e-7,
        }
    }
}

fn lift_independence_task(m: &MetricSpec, p: &LiftIndependenceParams, source: &str) -> Result<TaskOutput, CliError> {
    require_positive(source, "tolerance", p.tolerance)?;
    let family = LiftFamily::new(m.dim(), p.random_lifts, p.seed);
    let rows = first_error(map_seeded(p.samples, p.seed, |rng| family.spreads(m, rng)))?;
    let mut table = CsvTable::new(["sample", "curvature_spread", "curvature_spread_noisy", "dww_spread"]);
    with_params(&mut table, p);
    table.meta("seed", p.seed);
    let mut worst = [0.0f64; 3];
    for (i, r) in rows.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(nums(r.iter()));
        table.push(row);
        for (w, v) in worst.iter_mut().zip(r) {
            *w = w.max(*v);
        }
    }
    let mut out = TaskOutput {
        table,
        checks: Vec::new(),
    };
    let labels = ["curvature spread", "curvature spread with vertical noise", "D^W_W spread"];
    for (label, w) in labels.into_iter().zip(worst) {
        out.check(label, w, p.tolerance, Bound::Below);
    }
    Ok(out)
}
