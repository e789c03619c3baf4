//! Deterministic CSV emission: 17-significant-digit reals, atomic writes
//! and the run manifest.

use std::fs;
use std::io;
use std::path::Path;

/// One output table; rows are pre-formatted strings so emission is
/// byte-deterministic.
#[derive(Debug, Clone)]
pub struct CsvTable {
    /// Pipeline that produced the table, e.g. `fig2` or `adapt`.
    pub pipeline: String,
    /// File name within the output directory.
    pub file: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(pipeline: &str, file: &str, header: Vec<&'static str>) -> Self {
        Self {
            pipeline: pipeline.to_string(),
            file: file.to_string(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out.into_bytes()
    }
}

/// Round-trip-exact decimal form of a 64-bit real (17 significant digits).
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_flag(b: bool) -> String {
    if b { "1".into() } else { "0".into() }
}

/// Writes bytes to `dir/name` via a temporary file and rename, so readers
/// never observe a partial file.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!("{name}.tmp"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, dir.join(name))
}

/// Writes every table plus `manifest.csv` listing pipeline, file, row count
/// and the configuration hash. Manifest rows are sorted for reproducible
/// bytes.
pub fn write_tables(dir: &Path, tables: &[CsvTable], config_hash: &str) -> io::Result<()> {
    for table in tables {
        write_atomic(dir, &table.file, &table.to_bytes())?;
    }
    let mut entries: Vec<(String, String, usize)> = tables
        .iter()
        .map(|t| (t.pipeline.clone(), t.file.clone(), t.rows.len()))
        .collect();
    entries.sort();
    let mut manifest = CsvTable::new("manifest", "manifest.csv", vec![
        "pipeline",
        "file",
        "rows",
        "config_hash",
    ]);
    for (pipeline, file, rows) in entries {
        manifest.push(vec![pipeline, file, rows.to_string(), config_hash.to_string()]);
    }
    write_atomic(dir, &manifest.file, &manifest.to_bytes())
}
