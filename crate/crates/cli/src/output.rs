//! Flat-file emission and the run manifest.
//!
//! Every table goes through one row representation so CSV and JSON carry the
//! same columns in the same order. Nothing time- or host-dependent is
//! written, so identical inputs give byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use beveridge::Frame;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::config::Format;
use crate::error::{CliError, Result};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
    /// Months (CSV) or 1 (JSON spec).
    pub rows: usize,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub rows: usize,
    pub columns: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: String,
    pub command: &'static str,
    pub config: Value,
    pub input: InputRecord,
    pub outputs: Vec<OutputRecord>,
    /// Command-specific notes: dropped or infeasible months, raking report.
    pub diagnostics: Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_input(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::Config(format!("cannot read --input {}: {e}", path.display())))
}

fn to_json<T: Serialize>(x: &T) -> Result<Value> {
    serde_json::to_value(x).map_err(|e| CliError::Data(format!("serialization: {e}")))
}

/// Writes tables into one directory and remembers what it wrote.
pub struct Writer {
    dir: PathBuf,
    format: Format,
    outputs: Vec<OutputRecord>,
}

impl Writer {
    pub fn new(dir: &Path, format: Format) -> Result<Self> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Config(format!("cannot create --output-dir {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), format, outputs: Vec::new() })
    }

    /// One row per month of the frame's range, `date` first.
    pub fn frame(&mut self, stem: &str, frame: &Frame) -> Result<()> {
        let names: Vec<String> = frame.names().map(str::to_string).collect();
        let rows = match frame.range() {
            None => Vec::new(),
            Some(range) => range
                .months()
                .map(|m| {
                    let mut row = Map::new();
                    row.insert("date".into(), Value::String(m.to_string()));
                    for name in &names {
                        let v = frame.get(name).and_then(|s| s.get(m));
                        row.insert(name.clone(), v.map_or(Value::Null, Value::from));
                    }
                    row
                })
                .collect(),
        };
        let mut columns = vec!["date".to_string()];
        columns.extend(names);
        self.write(stem, columns, rows)
    }

    /// Serializable flat records; columns follow field order.
    pub fn rows<T: Serialize>(&mut self, stem: &str, rows: &[T]) -> Result<()> {
        let rows: Vec<Map<String, Value>> = rows
            .iter()
            .map(|r| match to_json(r)? {
                Value::Object(m) => Ok(m),
                other => Err(CliError::Data(format!("row is not a record: {other}"))),
            })
            .collect::<Result<_>>()?;
        let columns = rows.first().map(|r| r.keys().cloned().collect()).unwrap_or_default();
        self.write(stem, columns, rows)
    }

    fn write(&mut self, stem: &str, columns: Vec<String>, rows: Vec<Map<String, Value>>) -> Result<()> {
        let file = format!("{stem}.{}", self.format.extension());
        let path = self.dir.join(&file);
        let bytes = match self.format {
            Format::Json => {
                let mut b = serde_json::to_vec_pretty(&rows).map_err(|e| CliError::Data(e.to_string()))?;
                b.push(b'\n');
                b
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let fail = |e: csv::Error| CliError::Data(format!("{file}: {e}"));
                w.write_record(&columns).map_err(fail)?;
                for row in &rows {
                    w.write_record(columns.iter().map(|c| cell(row.get(c)))).map_err(fail)?;
                }
                w.into_inner().map_err(|e| CliError::Data(format!("{file}: {e}")))?
            }
        };
        fs::write(&path, bytes).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push(OutputRecord { file, rows: rows.len(), columns });
        Ok(())
    }

    pub fn finish(
        self,
        command: &'static str,
        config: &impl Serialize,
        input: InputRecord,
        diagnostics: &impl Serialize,
    ) -> Result<()> {
        let manifest = Manifest {
            tool: "bevacct",
            version: format!("bevacct {} (beveridge-core {})", env!("CARGO_PKG_VERSION"), beveridge::VERSION),
            command,
            config: to_json(config)?,
            input,
            outputs: self.outputs,
            diagnostics: to_json(diagnostics)?,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Data(e.to_string()))?;
        bytes.push(b'\n');
        let path = self.dir.join(MANIFEST);
        fs::write(&path, bytes).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
    }
}

/// Floats use the shortest round-trip form (exponent for extremes);
/// missing is empty.
fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) => u.to_string(),
            (_, Some(i), _) => i.to_string(),
            (_, _, Some(f)) => format!("{f:?}"),
            _ => n.to_string(),
        },
        Some(other) => other.to_string(),
    }
}
