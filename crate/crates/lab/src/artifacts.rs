//! Output files and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::LabError;

/// Files written by one run, in order.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    written: Vec<OutputFile>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Shortest round-trip decimal form.
pub fn num(v: f64) -> String {
    format!("{v}")
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self, LabError> {
        fs::create_dir_all(dir).map_err(|e| LabError::io(format!("creating {}", dir.display()), e))?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[OutputFile] {
        &self.written
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), LabError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| LabError::io(format!("writing {}", path.display()), e))?;
        self.written.push(OutputFile {
            file: name.to_string(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    /// Write a CSV table with a header row.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), LabError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| LabError::io("flushing csv", e.into_error()))?;
        self.write(name, &bytes)
    }

    /// `manifest.json`: inputs, code version and every output with its hash.
    pub fn manifest(&mut self, command: &str, config_path: &Path, config_text: &str, resolved: &serde_json::Value) -> Result<(), LabError> {
        let manifest = serde_json::json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "inputs": [{
                "file": config_path.display().to_string(),
                "sha256": sha256_hex(config_text.as_bytes()),
            }],
            "config": resolved,
            "outputs": self.written,
        });
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        let path = self.dir.join("manifest.json");
        fs::write(&path, text).map_err(|e| LabError::io(format!("writing {}", path.display()), e))
    }
}

/// Read a point cloud: coordinates, then an optional mass column. A header
/// row is skipped when its first field is not a number.
pub fn read_cloud(path: &Path) -> Result<(Vec<Vec<f64>>, Option<Vec<f64>>), LabError> {
    let field = "capacity.cloud.csv";
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| LabError::field(field, format!("{}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| LabError::field(field, e.to_string()))?;
        let parsed: Result<Vec<f64>, _> = rec.iter().map(|t| t.trim().parse::<f64>()).collect();
        match parsed {
            Ok(v) => rows.push(v),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(LabError::field(field, format!("row {}: {e}", i + 1))),
        }
    }
    if rows.is_empty() {
        return Err(LabError::field(field, "no points"));
    }
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) || !(width == 3 || width == 4) {
        return Err(LabError::field(field, "rows need three coordinates and an optional mass"));
    }
    if width == 4 {
        let masses = rows.iter().map(|r| r[3]).collect();
        Ok((rows.into_iter().map(|mut r| {
            r.truncate(3);
            r
        }).collect(), Some(masses)))
    } else {
        Ok((rows, None))
    }
}
