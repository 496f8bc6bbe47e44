//! Run outcomes, their on-disk layout and checksum verification.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::Table;

pub struct Artifact {
    /// File stem; the extension follows the output format.
    pub name: String,
    pub table: Table,
}

/// Per-state statistics recorded in the manifest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    pub m: String,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub turning_point: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integral: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_energy: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub nodes: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub scaled_nodes: Vec<f64>,
}

/// A task that produced no data. `expected` marks failures that are the
/// correct answer, such as the non-integrable box-limit distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub m: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub stage: String,
    pub expected: bool,
    pub message: String,
}

/// One invariant measured by `validate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// NaN when the check could not be evaluated; stored as null.
    #[serde(deserialize_with = "nan_if_null")]
    pub measured: f64,
    pub bound: f64,
    pub passed: bool,
    pub expected_failure: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

fn nan_if_null<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

impl Check {
    /// Passes when `measured <= bound`.
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Check { name: name.into(), measured, bound, passed: measured <= bound, expected_failure: false, detail: None }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    /// Counts against the run only if it failed and was not expected to.
    pub fn is_violation(&self) -> bool {
        !self.passed && !self.expected_failure
    }
}

#[derive(Default)]
pub struct Outcome {
    pub label: String,
    pub artifacts: Vec<Artifact>,
    pub summary: Vec<StateSummary>,
    pub failures: Vec<Failure>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn new(label: impl Into<String>) -> Self {
        Outcome { label: label.into(), ..Default::default() }
    }

    pub fn artifact(&self, name: &str) -> Option<&Table> {
        self.artifacts.iter().find(|a| a.name == name).map(|a| &a.table)
    }

    pub fn unexpected_failures(&self) -> usize {
        self.failures.iter().filter(|f| !f.expected).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub parameters: serde_json::Value,
    pub files: Vec<FileEntry>,
    pub summary: Vec<StateSummary>,
    pub failures: Vec<Failure>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub checks: Vec<Check>,
}

pub fn manifest_path(out: &Path, label: &str) -> PathBuf {
    out.join(format!("manifest-{label}.json"))
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn rendered(outcome: &Outcome, cfg: &RunConfig) -> Vec<(String, String)> {
    let mut files: Vec<(String, String)> = outcome
        .artifacts
        .iter()
        .map(|a| (format!("{}.{}", a.name, cfg.format.extension()), a.table.render(cfg.format)))
        .collect();
    files.sort();
    files
}

fn build(outcome: &Outcome, cfg: &RunConfig, files: &[(String, String)]) -> Manifest {
    Manifest {
        tool: "classrep".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: outcome.label.clone(),
        parameters: serde_json::to_value(cfg).expect("config serializes"),
        files: files
            .iter()
            .map(|(path, body)| FileEntry {
                path: path.clone(),
                sha256: sha256_hex(body.as_bytes()),
                bytes: body.len(),
            })
            .collect(),
        summary: outcome.summary.clone(),
        failures: outcome.failures.clone(),
        checks: outcome.checks.clone(),
    }
}

/// Writes every artifact and the manifest into `cfg.out`.
pub fn persist(outcome: &Outcome, cfg: &RunConfig) -> Result<Manifest> {
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    let files = rendered(outcome, cfg);
    for (name, body) in &files {
        let path = cfg.out.join(name);
        fs::write(&path, body).map_err(|e| CliError::io(path, e))?;
    }
    let manifest = build(outcome, cfg, &files);
    let path = manifest_path(&cfg.out, &outcome.label);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::io(path, e))?;
    Ok(manifest)
}

pub fn load(out: &Path, label: &str) -> Result<Manifest> {
    let path = manifest_path(out, label);
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Checks the stored files against the manifest and, when given, the
/// checksums of a fresh computation against both. Returns the mismatches.
pub fn verify(out: &Path, label: &str, fresh: Option<(&Outcome, &RunConfig)>) -> Result<Vec<String>> {
    let manifest = load(out, label)?;
    let mut problems = Vec::new();
    for entry in &manifest.files {
        match fs::read(out.join(&entry.path)) {
            Ok(bytes) if sha256_hex(&bytes) == entry.sha256 => {}
            Ok(_) => problems.push(format!("{}: checksum differs from the manifest", entry.path)),
            Err(e) => problems.push(format!("{}: {e}", entry.path)),
        }
    }
    if let Some((outcome, cfg)) = fresh {
        let files = rendered(outcome, cfg);
        let recomputed = build(outcome, cfg, &files).files;
        for entry in &recomputed {
            match manifest.files.iter().find(|f| f.path == entry.path) {
                Some(stored) if stored.sha256 == entry.sha256 => {}
                Some(_) => problems.push(format!("{}: recomputed data differ", entry.path)),
                None => problems.push(format!("{}: produced now but absent from the manifest", entry.path)),
            }
        }
        for stored in &manifest.files {
            if !recomputed.iter().any(|e| e.path == stored.path) {
                problems.push(format!("{}: listed in the manifest but no longer produced", stored.path));
            }
        }
    }
    Ok(problems)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::Cell;

    fn sample() -> Outcome {
        let mut t = Table::new(&["x"]);
        t.push(vec![Cell::Float(0.5)]);
        let mut o = Outcome::new("demo");
        o.artifacts.push(Artifact { name: "data".into(), table: t });
        o
    }

    #[test]
    fn persist_then_verify() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig { out: dir.path().to_path_buf(), ..Default::default() };
        let o = sample();
        let m = persist(&o, &cfg).unwrap();
        assert_eq!(m.files.len(), 1);
        assert_eq!(m.files[0].path, "data.csv");
        assert!(verify(dir.path(), "demo", Some((&o, &cfg))).unwrap().is_empty());

        fs::write(dir.path().join("data.csv"), "x\n0.6\n").unwrap();
        let problems = verify(dir.path(), "demo", None).unwrap();
        assert_eq!(problems.len(), 1, "{problems:?}");
    }
}
