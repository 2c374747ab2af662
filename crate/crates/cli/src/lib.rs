//! Scenario runner and verification suite for `finsler-core`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub mod csv;
pub mod error;
pub mod scenario;
pub mod suite;
pub mod tasks;

pub use error::CliError;

use crate::csv::{num, CsvTable};
use crate::scenario::{ArtifactPaths, Scenario};
use crate::suite::{Bound, Measurement, SuiteReport};
use crate::tasks::{run_task, satisfied_conditions, TaskOutput};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RESIDUAL: i32 = 2;

/// Outcome of a completed scenario run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub passed: bool,
    pub report: String,
    pub artifacts: ArtifactPaths,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_OK
        } else {
            EXIT_RESIDUAL
        }
    }
}

fn check_line(m: &Measurement) -> String {
    let op = if m.bound == Bound::Below { "<" } else { ">" };
    let verdict = if m.ok() { "PASS" } else { "FAIL" };
    format!("  [{verdict}] {} = {:.6e} (need {op} {:.1e})", m.label, m.value, m.threshold)
}

fn render_report(scenario: &Scenario, source: &str, out: &TaskOutput) -> String {
    let mut r = String::new();
    let _ = writeln!(r, "scenario: {source}");
    let _ = writeln!(r, "task: {}", scenario.task);
    for (k, v) in &out.table.metadata {
        if k != "task" {
            let _ = writeln!(r, "{k}: {v}");
        }
    }
    let _ = writeln!(r, "rows: {}", out.table.rows.len());
    if scenario.task == scenario::TaskKind::ConditionMatrix {
        let tol = scenario
            .parameters
            .get("tolerance")
            .and_then(|v| v.as_f64())
            .unwrap_or_else(|| tasks::ConditionMatrixParams::default().tolerance);
        let _ = writeln!(r, "conditions holding below {tol:e}:");
        for (lift, held) in satisfied_conditions(&out.table, tol) {
            let _ = writeln!(r, "  {lift:<11} {{{}}}", held.join(", "));
        }
    }
    let _ = writeln!(r, "checks:");
    for m in &out.checks {
        let _ = writeln!(r, "{}", check_line(m));
    }
    if out.checks.is_empty() {
        let _ = writeln!(r, "  (none)");
    }
    let _ = writeln!(r, "result: {}", if out.passed() { "PASS" } else { "FAIL" });
    r
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads and runs a scenario file. Artifacts are written only after every
/// computation has succeeded, so configuration and domain errors leave
/// nothing behind.
pub fn run_scenario(path: &Path) -> Result<RunOutcome, CliError> {
    let source = path.display().to_string();
    let scenario = Scenario::load(path)?;
    let metric = scenario
        .metric
        .build()
        .map_err(|e| CliError::config(&source, format!("field `metric`: {e}")))?;
    let out = run_task(scenario.task, &metric, &scenario.parameters, &source)?;
    let report = render_report(&scenario, &source, &out);
    let artifacts = scenario.artifact_paths(path);
    write_file(&artifacts.csv, &out.table.render())?;
    write_file(&artifacts.report, &report)?;
    Ok(RunOutcome {
        passed: out.passed(),
        report,
        artifacts,
    })
}

/// Pass/fail matrix of a suite run, one line per criterion.
pub fn render_suite(report: &SuiteReport) -> String {
    let mut r = String::new();
    let _ = writeln!(r, "verify-all, seed {}", report.seed);
    for c in &report.criteria {
        let _ = writeln!(r, "{c}");
    }
    let passed = report.criteria.iter().filter(|c| c.passed()).count();
    let _ = writeln!(
        r,
        "{passed}/{} criteria passed in {:.1} s",
        report.criteria.len(),
        report.seconds
    );
    r
}

/// Every measurement of a suite run as a table. Timing rows are left out
/// so the table depends on the seed alone.
pub fn suite_table(report: &SuiteReport) -> CsvTable {
    let mut t = CsvTable::new(["criterion", "item", "value", "bound", "threshold", "pass"]);
    t.meta("seed", report.seed);
    for c in &report.criteria {
        for m in c.measurements.iter().filter(|m| !m.label.contains("runtime")) {
            let bound = if m.bound == Bound::Below { "below" } else { "above" };
            t.push(vec![
                c.id.to_string(),
                m.label.clone(),
                num(m.value),
                bound.into(),
                num(m.threshold),
                m.ok().to_string(),
            ]);
        }
    }
    t
}

/// Writes `summary.txt`, `summary.csv` and `summary.json` into `dir`.
pub fn write_suite(report: &SuiteReport, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let json = serde_json::to_string_pretty(report).expect("suite reports serialize");
    let files = [
        ("summary.txt", render_suite(report)),
        ("summary.csv", suite_table(report).render()),
        ("summary.json", json),
    ];
    files
        .into_iter()
        .map(|(name, body)| {
            let p = dir.join(name);
            write_file(&p, &body)?;
            Ok(p)
        })
        .collect()
}
