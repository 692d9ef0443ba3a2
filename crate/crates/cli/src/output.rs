//! CSV and JSON artifacts, staged in memory and written together.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Identity of a run, written into every artifact.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub command: String,
    pub seed: u64,
    pub config_json: String,
}

impl Provenance {
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.command.as_bytes());
        h.update([0]);
        h.update(self.seed.to_le_bytes());
        h.update(self.config_json.as_bytes());
        hex::encode(h.finalize())
    }

    pub fn header(&self) -> String {
        format!(
            "# dressed-lattice {} config_sha256={} seed={} config={}",
            self.command,
            self.hash(),
            self.seed,
            self.config_json
        )
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_columns(name: &str, columns: Vec<String>) -> Self {
        Self {
            name: name.into(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn render(&self, header: &str) -> Result<Vec<u8>, CliError> {
        let mut buf = format!("{header}\n").into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&self.columns).map_err(|e| CliError::Io(e.to_string()))?;
            for r in &self.rows {
                w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
            }
            w.flush()?;
        }
        Ok(buf)
    }
}

#[derive(Debug, Clone)]
pub enum Artifact {
    Csv(Table),
    Json { name: String, value: Value },
}

impl Artifact {
    pub fn file_name(&self) -> String {
        match self {
            Artifact::Csv(t) => format!("{}.csv", t.name),
            Artifact::Json { name, .. } => format!("{name}.json"),
        }
    }

    fn render(&self, prov: &Provenance) -> Result<Vec<u8>, CliError> {
        match self {
            Artifact::Csv(t) => t.render(&prov.header()),
            Artifact::Json { value, .. } => {
                let doc = serde_json::json!({
                    "command": prov.command,
                    "config_sha256": prov.hash(),
                    "seed": prov.seed,
                    "config": serde_json::from_str::<Value>(&prov.config_json).unwrap_or(Value::Null),
                    "result": value,
                });
                let mut s = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
                s.push('\n');
                Ok(s.into_bytes())
            }
        }
    }
}

/// Render everything first so a failure leaves no partial output.
pub fn write_all(dir: &Path, prov: &Provenance, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, CliError> {
    let rendered: Vec<(String, Vec<u8>)> = artifacts
        .iter()
        .map(|a| Ok((a.file_name(), a.render(prov)?)))
        .collect::<Result<_, CliError>>()?;
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut paths = Vec::with_capacity(rendered.len());
    for (name, bytes) in rendered {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Shortest round-trip decimal, exponent form outside [1e-4, 1e15).
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.into()
}
