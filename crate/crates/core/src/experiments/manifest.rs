//! Runs a TOML manifest of checks and writes `report.json` (deterministic),
//! `timings.json` (wall clock, kept apart so reports compare byte for byte)
//! and one CSV per data series into the output directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::checks::{run_check, CheckKind, CheckOutcome, Settings};
use crate::error::{FracError, Result};
use crate::io;
use crate::par::Execution;

pub const SCHEMA_VERSION: u32 = 1;
/// Wall-clock budget for a full manifest, seconds.
pub const TOTAL_BUDGET: f64 = 600.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    /// Check names, run in order.
    #[serde(default)]
    pub checks: Vec<String>,
    /// Relative to the manifest's directory.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub settings: Settings,
}

impl Manifest {
    /// All checks with default settings.
    pub fn full() -> Self {
        Manifest {
            schema_version: SCHEMA_VERSION,
            checks: CheckKind::ALL.iter().map(|k| k.name().to_string()).collect(),
            output_dir: None,
            settings: Settings::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let m: Manifest = io::parse_toml(text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let m: Manifest = io::read_toml(path)?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(FracError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.kinds().map(|_| ())
    }

    pub fn kinds(&self) -> Result<Vec<CheckKind>> {
        self.checks.iter().map(|c| c.parse()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub passed: bool,
    pub failed: Vec<String>,
    pub settings: Settings,
    pub checks: Vec<CheckOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckTiming {
    pub check: CheckKind,
    pub seconds: f64,
    pub budget: f64,
    pub within_budget: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub checks: Vec<CheckTiming>,
    pub total_seconds: f64,
    pub total_budget: f64,
    pub within_budget: bool,
}

pub struct ManifestRun {
    pub report: ExperimentReport,
    pub timings: Timings,
    pub out_dir: PathBuf,
}

/// Runs `manifest`, writing into `out_dir`.
pub fn run_manifest_in(manifest: &Manifest, out_dir: &Path, exec: Execution) -> Result<ManifestRun> {
    manifest.validate()?;
    let kinds = manifest.kinds()?;
    std::fs::create_dir_all(out_dir).map_err(|e| FracError::io(out_dir, e))?;
    let start = Instant::now();
    let mut outcomes = Vec::new();
    let mut timings = Vec::new();
    for kind in kinds {
        let t0 = Instant::now();
        let run = run_check(kind, &manifest.settings, exec);
        let seconds = t0.elapsed().as_secs_f64();
        for s in &run.series {
            io::write_series(out_dir.join(format!("{}.csv", s.name)), s)?;
        }
        for (name, text) in &run.artifacts {
            io::write_text(out_dir.join(name), text)?;
        }
        let budget = kind.budget(&manifest.settings);
        timings.push(CheckTiming { check: kind, seconds, budget, within_budget: seconds <= budget });
        outcomes.push(run.outcome);
    }
    let total_seconds = start.elapsed().as_secs_f64();
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| o.check.name().to_string()).collect();
    let report = ExperimentReport {
        schema_version: SCHEMA_VERSION,
        passed: failed.is_empty(),
        failed,
        settings: manifest.settings.clone(),
        checks: outcomes,
    };
    let timings = Timings {
        checks: timings,
        total_seconds,
        total_budget: TOTAL_BUDGET,
        within_budget: total_seconds <= TOTAL_BUDGET,
    };
    io::write_json(out_dir.join("report.json"), &report)?;
    io::write_json(out_dir.join("timings.json"), &timings)?;
    Ok(ManifestRun { report, timings, out_dir: out_dir.to_path_buf() })
}

/// Loads the manifest at `path` and runs it; the output directory is
/// `out_override`, else the manifest's `output_dir`, else `fracwave-out`,
/// the latter two relative to the manifest.
pub fn run_manifest(path: impl AsRef<Path>, out_override: Option<&Path>, exec: Execution) -> Result<ManifestRun> {
    let path = path.as_ref();
    let manifest = Manifest::load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let out = match (out_override, &manifest.output_dir) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(d)) => base.join(d),
        (None, None) => base.join("fracwave-out"),
    };
    run_manifest_in(&manifest, &out, exec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsing_and_validation() {
        let m = Manifest::parse("schema_version = 1\nchecks = [\"symbol\"]\n[settings]\nalpha = 0.75\n").unwrap();
        assert_eq!(m.kinds().unwrap(), vec![CheckKind::Symbol]);
        assert_eq!(m.settings.alpha, 0.75);
        assert_eq!(m.settings.sweep.alphas, vec![0.5, 0.75]);
        assert!(matches!(
            Manifest::parse("schema_version = 1\nchecks = [\"nope\"]\n"),
            Err(FracError::UnknownCheck(_))
        ));
        assert!(Manifest::parse("schema_version = 2\n").is_err());
        assert!(Manifest::parse("schema_version = 1\n[settings]\nalpah = 0.5\n").is_err());
        let full = Manifest::full();
        let text = toml::to_string(&full).unwrap();
        assert_eq!(Manifest::parse(&text).unwrap(), full);
    }

    #[test]
    fn empty_manifest_is_an_empty_success() {
        let dir = tempfile::tempdir().unwrap();
        let m = Manifest::parse("schema_version = 1\n").unwrap();
        let run = run_manifest_in(&m, dir.path(), Execution::default()).unwrap();
        assert!(run.report.passed && run.report.checks.is_empty());
        let back: ExperimentReport = io::read_json(dir.path().join("report.json")).unwrap();
        assert_eq!(back, run.report);
        let t: Timings = io::read_json(dir.path().join("timings.json")).unwrap();
        assert!(t.checks.is_empty());
    }
}
