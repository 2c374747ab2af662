//! JSON scenario files.
//!
//! ```json
//! {
//!   "version": 1,
//!   "task": "curvature-sweep",
//!   "metric": {"name": "funk"},
//!   "parameters": {"samples": 100, "seed": 7, "expected": -0.25},
//!   "output": {"dir": "out", "csv": "funk.csv", "report": "funk.txt"}
//! }
//! ```
//!
//! Relative output directories are resolved against the scenario file.

use std::fmt;
use std::path::{Path, PathBuf};

use finsler_core::descriptor::MetricDescriptor;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    CheckMetric,
    ConditionMatrix,
    CurvatureSweep,
    Geodesic,
    JacobiCompare,
    SecondVariation,
    SffCompare,
    LiftIndependence,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::CheckMetric => "check-metric",
            TaskKind::ConditionMatrix => "condition-matrix",
            TaskKind::CurvatureSweep => "curvature-sweep",
            TaskKind::Geodesic => "geodesic",
            TaskKind::JacobiCompare => "jacobi-compare",
            TaskKind::SecondVariation => "second-variation",
            TaskKind::SffCompare => "sff-compare",
            TaskKind::LiftIndependence => "lift-independence",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub report: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    version: u32,
    task: TaskKind,
    metric: Value,
    #[serde(default)]
    parameters: Value,
    #[serde(default)]
    output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub version: u32,
    pub task: TaskKind,
    pub metric: MetricDescriptor,
    #[serde(default)]
    pub parameters: Value,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Where the artifacts of a run go.
#[derive(Debug, Clone, PartialEq)]
pub struct ArtifactPaths {
    pub csv: PathBuf,
    pub report: PathBuf,
}

impl Scenario {
    /// Parses scenario text; `source_name` labels diagnostics.
    pub fn parse(text: &str, source_name: &str) -> Result<Self, CliError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let raw: RawScenario = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let message = if path == "." || path.is_empty() {
                inner.to_string()
            } else {
                format!("field `{path}`: {inner}")
            };
            CliError::config(source_name, message)
        })?;
        // The metric is decoded separately so that errors inside it carry
        // their full field path.
        let metric = serde_path_to_error::deserialize(&raw.metric).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "metric".to_string() } else { format!("metric.{path}") };
            CliError::config(source_name, format!("field `{field}`: {}", e.into_inner()))
        })?;
        let scenario = Scenario {
            version: raw.version,
            task: raw.task,
            metric,
            parameters: raw.parameters,
            output: raw.output,
        };
        if scenario.version != FORMAT_VERSION {
            return Err(CliError::config(
                source_name,
                format!("field `version`: unsupported version {}, expected {FORMAT_VERSION}", scenario.version),
            ));
        }
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(&name, format!("cannot read: {e}")))?;
        Self::parse(&text, &name)
    }

    pub fn artifact_paths(&self, scenario_path: &Path) -> ArtifactPaths {
        let base = scenario_path.parent().unwrap_or(Path::new("."));
        let dir = match &self.output.dir {
            Some(d) if d.is_absolute() => d.clone(),
            Some(d) => base.join(d),
            None => base.to_path_buf(),
        };
        let task = self.task.name();
        ArtifactPaths {
            csv: dir.join(self.output.csv.clone().unwrap_or_else(|| format!("{task}.csv"))),
            report: dir.join(self.output.report.clone().unwrap_or_else(|| format!("{task}.txt"))),
        }
    }
}

/// Deserializes task parameters; a missing or `null` block yields defaults.
/// Errors name the offending field as `parameters.<path>`.
pub fn parameters<T: DeserializeOwned + Default>(value: &Value, source_name: &str) -> Result<T, CliError> {
    if value.is_null() {
        return Ok(T::default());
    }
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "parameters".to_string() } else { format!("parameters.{path}") };
        CliError::config(source_name, format!("field `{field}`: {}", e.into_inner()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scenario() {
        let s = Scenario::parse(r#"{"version": 1, "task": "check-metric", "metric": {"name": "euclidean"}}"#, "t")
            .unwrap();
        assert_eq!(s.task, TaskKind::CheckMetric);
        assert!(s.parameters.is_null());
        let p = s.artifact_paths(Path::new("/a/b/s.json"));
        assert_eq!(p.csv, PathBuf::from("/a/b/check-metric.csv"));
    }

    #[test]
    fn diagnostics_name_the_field() {
        let text = "{\n  \"version\": 1,\n  \"task\": \"geodesic\",\n  \"metric\": {\"name\": \"sphere\", \"dim\": \"two\"}\n}";
        let msg = Scenario::parse(text, "t").unwrap_err().to_string();
        assert!(msg.contains("`metric`") && msg.contains("\"two\""), "{msg}");

        let msg = Scenario::parse("{\n  \"version\": 1,\n  \"task\": \"walk\"\n}", "t").unwrap_err().to_string();
        assert!(msg.contains("line 3") && msg.contains("task"), "{msg}");

        let msg = Scenario::parse(r#"{"version": 2, "task": "geodesic", "metric": {"name": "funk"}}"#, "t")
            .unwrap_err()
            .to_string();
        assert!(msg.contains("version"), "{msg}");
    }

    #[test]
    fn parameter_errors_are_prefixed() {
        #[derive(Debug, Default, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        struct P {
            #[allow(dead_code)]
            samples: usize,
        }
        let v: Value = serde_json::json!({"samples": -1});
        let msg = parameters::<P>(&v, "t").unwrap_err().to_string();
        assert!(msg.contains("parameters.samples"), "{msg}");
        let v: Value = serde_json::json!({"sample": 3});
        assert!(parameters::<P>(&v, "t").is_err());
    }
}
