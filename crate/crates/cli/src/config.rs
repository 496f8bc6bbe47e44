//! Run configuration: built-in defaults, then an optional JSON file, then
//! command-line flags. The worker count may also come from
//! `CLASSREP_WORKERS`, which sits between the file and the flag.
//!
//! File schema (every key optional, unknown keys rejected):
//!
//! ```json
//! {
//!   "m": [1, 2, "inf"],
//!   "n": [0, 4],
//!   "grid_min": 1e-6,
//!   "grid_max": 50.0,
//!   "points": 1500,
//!   "format": "csv",
//!   "out": "results",
//!   "workers": 4,
//!   "tolerance_profile": "standard"
//! }
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use classrep::Exponent;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const WORKERS_ENV: &str = "CLASSREP_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Config(format!("unknown format {other:?} (csv or json)"))),
        }
    }
}

/// Scales every bound used by `validate` and `residual`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToleranceProfile {
    Strict,
    Standard,
    Relaxed,
}

impl ToleranceProfile {
    pub fn factor(self) -> f64 {
        match self {
            ToleranceProfile::Strict => 0.1,
            ToleranceProfile::Standard => 1.0,
            ToleranceProfile::Relaxed => 10.0,
        }
    }
}

impl FromStr for ToleranceProfile {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(ToleranceProfile::Strict),
            "standard" => Ok(ToleranceProfile::Standard),
            "relaxed" => Ok(ToleranceProfile::Relaxed),
            other => {
                Err(CliError::Config(format!("unknown tolerance profile {other:?} (strict, standard or relaxed)")))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ExponentValue {
    Number(u32),
    Text(String),
}

impl ExponentValue {
    fn resolve(&self) -> Result<Exponent> {
        match self {
            ExponentValue::Number(m) => Exponent::from_str(&m.to_string()),
            ExponentValue::Text(s) => Exponent::from_str(s),
        }
        .map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Contents of a JSON config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    m: Option<Vec<ExponentValue>>,
    n: Option<Vec<usize>>,
    grid_min: Option<f64>,
    grid_max: Option<f64>,
    points: Option<usize>,
    format: Option<Format>,
    out: Option<PathBuf>,
    workers: Option<usize>,
    tolerance_profile: Option<ToleranceProfile>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Values given on the command line; `None` leaves the lower layer in place.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub m: Option<Vec<Exponent>>,
    pub n: Option<Vec<usize>>,
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub points: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub tolerance_profile: Option<ToleranceProfile>,
}

/// Fully resolved configuration. `m` and `n` are `None` when neither the
/// file nor the flags set them, so each command can apply its own default.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub m: Option<Vec<Exponent>>,
    pub n: Option<Vec<usize>>,
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub points: Option<usize>,
    pub format: Format,
    pub out: PathBuf,
    pub workers: usize,
    pub tolerance_profile: ToleranceProfile,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            m: None,
            n: None,
            grid_min: None,
            grid_max: None,
            points: None,
            format: Format::Csv,
            out: PathBuf::from("results"),
            workers: default_workers(),
            tolerance_profile: ToleranceProfile::Standard,
        }
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

impl RunConfig {
    /// Layers defaults, `file`, the environment and `cli`, then validates.
    pub fn resolve(file: Option<FileConfig>, env_workers: Option<String>, cli: Overrides) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(f) = file {
            if let Some(m) = f.m {
                cfg.m = Some(m.iter().map(ExponentValue::resolve).collect::<Result<_>>()?);
            }
            cfg.n = f.n.or(cfg.n);
            cfg.grid_min = f.grid_min.or(cfg.grid_min);
            cfg.grid_max = f.grid_max.or(cfg.grid_max);
            cfg.points = f.points.or(cfg.points);
            cfg.format = f.format.unwrap_or(cfg.format);
            cfg.out = f.out.unwrap_or(cfg.out);
            cfg.workers = f.workers.unwrap_or(cfg.workers);
            cfg.tolerance_profile = f.tolerance_profile.unwrap_or(cfg.tolerance_profile);
        }
        if let Some(v) = env_workers.filter(|v| !v.trim().is_empty()) {
            cfg.workers =
                v.trim().parse().map_err(|_| CliError::Config(format!("{WORKERS_ENV}={v:?} is not a worker count")))?;
        }
        cfg.m = cli.m.or(cfg.m);
        cfg.n = cli.n.or(cfg.n);
        cfg.grid_min = cli.grid_min.or(cfg.grid_min);
        cfg.grid_max = cli.grid_max.or(cfg.grid_max);
        cfg.points = cli.points.or(cfg.points);
        cfg.format = cli.format.unwrap_or(cfg.format);
        cfg.out = cli.out.unwrap_or(cfg.out);
        cfg.workers = cli.workers.unwrap_or(cfg.workers);
        cfg.tolerance_profile = cli.tolerance_profile.unwrap_or(cfg.tolerance_profile);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m.as_ref().is_some_and(|m| m.is_empty()) {
            return Err(CliError::Config("the m list is empty".into()));
        }
        if self.n.as_ref().is_some_and(|n| n.is_empty()) {
            return Err(CliError::Config("the n list is empty".into()));
        }
        for (name, v) in [("grid-min", self.grid_min), ("grid-max", self.grid_max)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(CliError::Config(format!("{name} must be positive and finite, got {v}")));
                }
            }
        }
        if let (Some(a), Some(b)) = (self.grid_min, self.grid_max) {
            if a >= b {
                return Err(CliError::Config(format!("grid-min {a} is not below grid-max {b}")));
            }
        }
        if self.points.is_some_and(|p| p < 8) {
            return Err(CliError::Config("points must be at least 8".into()));
        }
        if self.workers == 0 {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn m_or(&self, default: &[Exponent]) -> Vec<Exponent> {
        let mut m = self.m.clone().unwrap_or_else(|| default.to_vec());
        m.sort();
        m.dedup();
        m
    }

    pub fn n_or(&self, default: &[usize]) -> Vec<usize> {
        let mut n = self.n.clone().unwrap_or_else(|| default.to_vec());
        n.sort_unstable();
        n.dedup();
        n
    }
}

/// Parses "1,2,5..8,inf"; ranges are inclusive.
pub fn parse_exponents(s: &str) -> Result<Vec<Exponent>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let (a, b) = (parse_index(a)?, parse_index(b)?);
            for m in a..=b {
                out.push(Exponent::from_str(&m.to_string()).map_err(|e| CliError::Config(e.to_string()))?);
            }
        } else {
            out.push(Exponent::from_str(item).map_err(|e| CliError::Config(e.to_string()))?);
        }
    }
    Ok(out)
}

/// Parses "0,4" or "0..6".
pub fn parse_indices(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match item.split_once("..") {
            Some((a, b)) => out.extend(parse_index(a)?..=parse_index(b)?),
            None => out.push(parse_index(item)?),
        }
    }
    Ok(out)
}

fn parse_index(s: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| CliError::Config(format!("{s:?} is not a non-negative integer")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(
            parse_exponents("1, 3..4,inf").unwrap(),
            vec![Exponent::Finite(1), Exponent::Finite(3), Exponent::Finite(4), Exponent::Infinite]
        );
        assert_eq!(parse_indices("0..2,4").unwrap(), vec![0, 1, 2, 4]);
        assert!(parse_exponents("0").is_err());
        assert!(parse_indices("x").is_err());
    }

    #[test]
    fn flags_override_file_and_environment() {
        let file: FileConfig =
            serde_json::from_str(r#"{"m": [2, "inf"], "n": [1], "workers": 3, "format": "json"}"#).unwrap();
        let cli = Overrides { n: Some(vec![0, 4]), ..Default::default() };
        let cfg = RunConfig::resolve(Some(file.clone()), Some("5".into()), cli).unwrap();
        assert_eq!(cfg.m, Some(vec![Exponent::Finite(2), Exponent::Infinite]));
        assert_eq!(cfg.n, Some(vec![0, 4]));
        assert_eq!(cfg.workers, 5);
        assert_eq!(cfg.format, Format::Json);

        let cli = Overrides { workers: Some(2), ..Default::default() };
        assert_eq!(RunConfig::resolve(Some(file), Some("5".into()), cli).unwrap().workers, 2);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad: std::result::Result<FileConfig, _> = serde_json::from_str(r#"{"colour": 1}"#);
        assert!(bad.is_err());
        let cli = Overrides { grid_min: Some(2.0), grid_max: Some(1.0), ..Default::default() };
        assert!(matches!(RunConfig::resolve(None, None, cli), Err(CliError::Config(_))));
        assert!(RunConfig::resolve(None, Some("many".into()), Overrides::default()).is_err());
        let cli = Overrides { n: Some(vec![]), ..Default::default() };
        assert!(RunConfig::resolve(None, None, cli).is_err());
    }
}
