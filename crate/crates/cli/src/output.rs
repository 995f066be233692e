//! Result files and the run manifest.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// 17 significant digits, enough to round-trip any f64.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// A CSV table in memory.
pub struct Table {
    wtr: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Result<Table> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(header)?;
        Ok(Table { wtr })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        self.wtr.write_record(fields)?;
        Ok(())
    }

    pub fn finish(self) -> Result<Vec<u8>> {
        self.wtr.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
    }
}

pub fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(v)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn write_files(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, bytes) in files {
        let p = dir.join(name);
        std::fs::write(&p, bytes).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

#[derive(Serialize)]
pub struct Versions {
    pub ncheat: &'static str,
    pub ncheat_cli: &'static str,
}

pub const VERSIONS: Versions = Versions { ncheat: ncheat::VERSION, ncheat_cli: env!("CARGO_PKG_VERSION") };

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub schema_version: u32,
    pub operation: Option<&'a str>,
    /// `ok`, `flagged`, `invalid` or `failed`.
    pub status: &'a str,
    pub exit_code: u8,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub messages: Vec<String>,
    pub config: Option<&'a ExperimentConfig>,
    pub config_sha256: Option<String>,
    pub seeds: Vec<u64>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub versions: Versions,
    pub threads: usize,
    pub wall_time_s: f64,
}

pub const MANIFEST: &str = "manifest.json";

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    sha256_hex(serde_json::to_string(cfg).expect("configs serialize").as_bytes())
}
