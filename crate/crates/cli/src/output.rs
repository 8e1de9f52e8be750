use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliResult;

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (", env!("SMOOTHCAL_BUILD_ID"), ")");

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// One measured quantity against its bound.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    pub bound: Option<f64>,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= bound`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value: finite(value), bound: finite(bound), pass: value <= bound }
    }

    /// Passes when `value >= bound`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value: finite(value), bound: finite(bound), pass: value >= bound }
    }

    pub fn holds(name: impl Into<String>, pass: bool) -> Self {
        Self { name: name.into(), value: None, bound: None, pass }
    }
}

pub fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Directory receiving a run's artifacts.
pub struct OutDir {
    path: PathBuf,
}

impl OutDir {
    pub fn create(path: &Path) -> CliResult<Self> {
        fs::create_dir_all(path)?;
        Ok(Self { path: path.to_path_buf() })
    }

    pub fn csv(&self, name: &str, header: &[String]) -> CliResult<csv::Writer<fs::File>> {
        let mut w = csv::Writer::from_path(self.path.join(name))?;
        w.write_record(header)?;
        Ok(w)
    }

    pub fn write(&self, name: &str, text: &str) -> CliResult<()> {
        fs::write(self.path.join(name), text)?;
        Ok(())
    }

    /// Writes `summary.json` and returns whether every check passed.
    pub fn summary(&self, kind: &str, config: Value, results: Value, checks: &[Check]) -> CliResult<bool> {
        let pass = checks.iter().all(|c| c.pass);
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let doc = json!({
            "schema": format!("smoothcal/{kind}/v1"),
            "kind": kind,
            "build": { "version": env!("CARGO_PKG_VERSION"), "id": env!("SMOOTHCAL_BUILD_ID") },
            "metadata": { "timestamp": timestamp },
            "config": config,
            "results": results,
            "checks": checks,
            "pass": pass,
        });
        let text = serde_json::to_string_pretty(&doc).expect("summary serializes");
        self.write("summary.json", &(text + "\n"))?;
        Ok(pass)
    }
}

/// Column names `prefix_1..prefix_n`.
pub fn columns(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}_{i}")).collect()
}

pub fn nums(v: &[f64]) -> impl Iterator<Item = String> + '_ {
    v.iter().map(|x| num(*x))
}
