//! Output directory layout: one CSV per table plus `manifest.json`.
//!
//! The manifest holds no timestamps, so identical runs write identical bytes.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use super::table::Table;
use crate::error::{Error, Result};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub rows: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub manifest_version: u32,
    pub tool_version: String,
    pub command: String,
    pub seed: u64,
    /// SHA-256 of the canonical JSON form of `config`.
    pub config_hash: String,
    pub config: RunConfig,
    /// Fitted exponents and other scalar results.
    pub results: BTreeMap<String, f64>,
    pub outputs: Vec<OutputFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn config_hash(cfg: &RunConfig) -> String {
    let canonical = serde_json::to_vec(cfg).expect("config serializes");
    sha256_hex(&canonical)
}

/// Writes every table and the manifest under `cfg.output_dir`.
///
/// All CSVs are rendered before the directory is touched.
pub fn write_outputs(
    cfg: &RunConfig,
    command: &str,
    tables: &[Table],
    results: &BTreeMap<String, f64>,
) -> Result<(PathBuf, Manifest)> {
    let rendered = tables
        .iter()
        .map(|t| Ok((t, t.to_csv_bytes()?)))
        .collect::<Result<Vec<_>>>()?;
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
    let mut outputs = Vec::with_capacity(tables.len());
    for (t, bytes) in rendered {
        let file = format!("{}.csv", t.name);
        let path = dir.join(&file);
        std::fs::write(&path, &bytes).map_err(|e| Error::Io { path: path.clone(), source: e })?;
        outputs.push(OutputFile { file, rows: t.rows.len(), sha256: sha256_hex(&bytes) });
    }
    let manifest = Manifest {
        manifest_version: MANIFEST_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        seed: cfg.seed,
        config_hash: config_hash(cfg),
        config: cfg.clone(),
        results: results.clone(),
        outputs,
    };
    let path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Json { path: path.clone(), source: e })?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::Io { path: path.clone(), source: e })?;
    Ok((path, manifest))
}
