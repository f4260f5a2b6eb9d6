//! Columnar tables and their CSV/JSON encodings.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::config(
                "format",
                format!("expected csv or json, got {other:?}"),
            )),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

/// Named numeric columns of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<(String, Vec<f64>)>,
    /// Extra JSON metadata; CSV carries none.
    pub meta: Map<String, Value>,
}

impl Table {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            columns: Vec::new(),
            meta: Map::new(),
        }
    }

    pub fn column(mut self, name: impl Into<String>, values: Vec<f64>) -> Self {
        self.columns.push((name.into(), values));
        self
    }

    pub fn meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.1.len())
    }

    fn check(&self) -> Result<()> {
        let n = self.rows();
        for (name, values) in &self.columns {
            if values.len() != n {
                return Err(Error::Dimension(format!(
                    "column {name} of {} has {} rows, expected {n}",
                    self.name,
                    values.len()
                )));
            }
            if let Some(k) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::Numerical(format!(
                    "non-finite value {} in {}.{name} row {k}",
                    values[k], self.name
                )));
            }
        }
        Ok(())
    }
}

/// Shortest round-trip scientific notation.
pub fn format_float(v: f64) -> String {
    format!("{v:e}")
}

/// Encodes a table. Fails on ragged columns or any non-finite value.
pub fn render(table: &Table, format: Format, manifest: &str) -> Result<Vec<u8>> {
    table.check()?;
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let header: Vec<&str> = table.columns.iter().map(|c| c.0.as_str()).collect();
            w.write_record(&header).map_err(csv_error)?;
            for k in 0..table.rows() {
                w.write_record(table.columns.iter().map(|c| format_float(c.1[k])))
                    .map_err(csv_error)?;
            }
            w.into_inner()
                .map_err(|e| Error::Numerical(format!("csv encoding failed: {e}")))
        }
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("manifest".into(), manifest.into());
            doc.insert("table".into(), table.name.clone().into());
            doc.extend(table.meta.clone());
            let columns: Map<String, Value> = table
                .columns
                .iter()
                .map(|(name, values)| (name.clone(), Value::from(values.clone())))
                .collect();
            doc.insert("columns".into(), Value::Object(columns));
            let mut out = serde_json::to_vec_pretty(&Value::Object(doc))
                .map_err(|e| Error::Numerical(format!("json encoding failed: {e}")))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Numerical(format!("csv encoding failed: {e}"))
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Writes each table as `<name>.<ext>` under `dir` and returns the paths
/// with the SHA-256 of their contents.
pub fn write_records(tables: &[Table], format: Format, dir: &Path) -> Result<Vec<OutputFile>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let encoded = tables
        .iter()
        .map(|t| render(t, format, MANIFEST_FILE).map(|b| (t, b)))
        .collect::<Result<Vec<_>>>()?;
    encoded
        .into_iter()
        .map(|(t, bytes)| {
            let file = format!("{}.{}", t.name, format.extension());
            write_atomic(&dir.join(&file), &bytes)?;
            Ok(OutputFile {
                path: file,
                sha256: sha256_hex(&bytes),
            })
        })
        .collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Relative to the manifest.
    pub path: String,
    pub sha256: String,
}

/// Provenance of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: String,
    pub config_path: Option<PathBuf>,
    pub config_sha256: String,
    pub format: Format,
    pub outputs: Vec<OutputFile>,
    pub tool_version: String,
    pub duration_seconds: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        Table::new("trajectory")
            .column("t", vec![0.0, 0.5])
            .column("fidelity", vec![1.0 / 9.0, 1.0])
    }

    #[test]
    fn csv_layout() {
        let text = String::from_utf8(render(&sample(), Format::Csv, MANIFEST_FILE).unwrap()).unwrap();
        assert_eq!(text, "t,fidelity\n0e0,1.111111111111111e-1\n5e-1,1e0\n");
    }

    #[test]
    fn floats_round_trip() {
        for v in [1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.1 + 0.2] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let digits = s
                .split('e')
                .next()
                .unwrap()
                .chars()
                .filter(char::is_ascii_digit)
                .count();
            assert!(digits <= 17);
        }
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new("trajectory")
            .column("t", vec![])
            .column("fidelity", vec![]);
        assert_eq!(render(&t, Format::Csv, MANIFEST_FILE).unwrap(), b"t,fidelity\n");
    }

    #[test]
    fn nan_is_refused() {
        let t = Table::new("x").column("t", vec![0.0, f64::NAN]);
        for f in [Format::Csv, Format::Json] {
            assert!(matches!(render(&t, f, MANIFEST_FILE), Err(Error::Numerical(_))));
        }
        let ragged = Table::new("x").column("a", vec![0.0]).column("b", vec![]);
        assert!(render(&ragged, Format::Csv, MANIFEST_FILE).is_err());
    }

    #[test]
    fn json_round_trips() {
        let t = sample().meta("scenario", "fig2");
        let bytes = render(&t, Format::Json, MANIFEST_FILE).unwrap();
        let v: Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(v["manifest"], MANIFEST_FILE);
        assert_eq!(v["scenario"], "fig2");
        let fid: Vec<f64> = serde_json::from_value(v["columns"]["fidelity"].clone()).unwrap();
        assert_eq!(fid, vec![1.0 / 9.0, 1.0]);
    }

    #[test]
    fn atomic_write_and_hash() {
        let dir = tempfile::tempdir().unwrap();
        let out = write_records(&[sample()], Format::Csv, &dir.path().join("sub")).unwrap();
        let bytes = fs::read(dir.path().join("sub/trajectory.csv")).unwrap();
        assert_eq!(out[0].sha256, sha256_hex(&bytes));
        assert_eq!(fs::read_dir(dir.path().join("sub")).unwrap().count(), 1);
    }

    #[test]
    fn unwritable_directory_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, b"").unwrap();
        let err = write_records(&[sample()], Format::Csv, &blocker.join("x")).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }
}
