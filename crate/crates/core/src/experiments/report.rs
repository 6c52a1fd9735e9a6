//! CSV data files and the JSON run manifest.
//!
//! Data files start with the schema line `#alpha-walk-lab v1` and contain
//! nothing that depends on the wall clock or the worker count. The manifest
//! keeps the timestamp in its `header` object only.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};

use super::config::ExperimentConfig;

pub const SCHEMA_LINE: &str = "#alpha-walk-lab v1";

/// One pass/fail outcome of an assertion-grade check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

/// Shortest round-trip scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// CSV writer that emits the schema line before the header row.
pub struct DataFile {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl DataFile {
    pub fn create(dir: &Path, name: &str, columns: &[&str]) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(name);
        let mut file = BufWriter::new(File::create(&path)?);
        writeln!(file, "{SCHEMA_LINE}")?;
        let mut writer = csv::Writer::from_writer(file);
        writer.write_record(columns).map_err(csv_err)?;
        Ok(DataFile { path, writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(csv_err)
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.writer.flush()?;
        Ok(self.path)
    }
}

/// Write `manifest.json`: a `header` with tool, version and timestamp, then
/// the canonical config, the checks and a kind-specific `results` object.
pub fn write_manifest<T: Serialize>(
    dir: &Path,
    config: &ExperimentConfig,
    files: &[PathBuf],
    checks: &[Check],
    results: &T,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let names: Vec<String> = files
        .iter()
        .map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default())
        .collect();
    let doc = json!({
        "header": {
            "tool": "alpha-walk-lab",
            "version": env!("CARGO_PKG_VERSION"),
            "timestamp_unix": timestamp,
        },
        "kind": config.kind.name(),
        "seed": config.seed,
        "config": config.to_canonical(),
        "data_files": names,
        "checks": checks,
        "passed": all_passed(checks),
        "results": results,
    });
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    std::fs::write(&path, text + "\n")?;
    Ok(path)
}
