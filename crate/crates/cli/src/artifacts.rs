//! Output bundle: CSV tables, `summary.json` and `manifest.json`.
//!
//! Everything is buffered in memory and written only once the computation has
//! succeeded, so a failed run never leaves partial files behind.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliResult;

pub const SUMMARY: &str = "summary.json";
pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Deterministic part of a run: no timings, no paths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub command: String,
    pub checks: Vec<Check>,
    pub values: Map<String, Value>,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub generator: String,
    pub seed: u64,
    /// Named seed streams actually used (replicas, disorder fields, samplers).
    pub seeds: Map<String, Value>,
    pub config: RunConfig,
    pub threads: usize,
    pub wall_clock_seconds: f64,
    pub files: Vec<FileEntry>,
}

pub struct Bundle {
    command: String,
    files: Vec<(String, Vec<u8>)>,
    checks: Vec<Check>,
    values: Map<String, Value>,
    seeds: Map<String, Value>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Bundle {
    pub fn new(command: &str) -> Self {
        Self { command: command.into(), files: Vec::new(), checks: Vec::new(), values: Map::new(), seeds: Map::new() }
    }

    /// Adds a CSV file produced by `fill`; rows must use `\n` endings.
    pub fn csv<F>(&mut self, name: &str, fill: F) -> CliResult<()>
    where
        F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    {
        let mut buf = Vec::new();
        fill(&mut buf)?;
        self.files.push((name.into(), buf));
        Ok(())
    }

    /// Adds a CSV file from a header and rows of already formatted cells.
    pub fn table(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
        self.csv(name, |w| {
            writeln!(w, "{}", header.join(","))?;
            for row in rows {
                writeln!(w, "{}", row.join(","))?;
            }
            Ok(())
        })
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), pass, detail: detail.into() });
    }

    pub fn value<T: Serialize>(&mut self, key: &str, v: T) -> CliResult<()> {
        self.values.insert(key.into(), serde_json::to_value(v)?);
        Ok(())
    }

    pub fn seed<T: Serialize>(&mut self, key: &str, v: T) -> CliResult<()> {
        self.seeds.insert(key.into(), serde_json::to_value(v)?);
        Ok(())
    }

    pub fn summary(&self) -> Summary {
        Summary { command: self.command.clone(), checks: self.checks.clone(), values: self.values.clone() }
    }

    /// Writes every file into `dir`, then the manifest with their checksums.
    pub fn write(self, dir: &Path, config: &RunConfig, wall_clock_seconds: f64) -> CliResult<Summary> {
        let summary = self.summary();
        let mut files = self.files;
        let mut text = serde_json::to_vec_pretty(&summary)?;
        text.push(b'\n');
        files.push((SUMMARY.into(), text));

        std::fs::create_dir_all(dir)?;
        let mut entries = Vec::with_capacity(files.len());
        for (name, bytes) in &files {
            std::fs::write(dir.join(name), bytes)?;
            entries.push(FileEntry { name: name.clone(), sha256: sha256_hex(bytes), bytes: bytes.len() });
        }
        let manifest = Manifest {
            version: env!("CARGO_PKG_VERSION").into(),
            generator: pinlab::seeds::GENERATOR.into(),
            seed: config.seed,
            seeds: self.seeds,
            config: config.clone(),
            threads: rayon::current_num_threads(),
            wall_clock_seconds,
            files: entries,
        };
        let mut text = serde_json::to_vec_pretty(&manifest)?;
        text.push(b'\n');
        std::fs::write(dir.join(MANIFEST), text)?;
        Ok(summary)
    }
}

pub fn manifest_path(dir: &Path) -> PathBuf {
    dir.join(MANIFEST)
}

/// Fixed-format float cell: scientific with full precision, `.` decimal separator.
pub fn num(x: f64) -> String {
    format!("{x:.17e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_checksummed_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut b = Bundle::new("renewal");
        b.table("t.csv", &["a", "b"], vec![vec!["1".into(), num(0.5)]]).unwrap();
        b.check("ok", true, "fine");
        let cfg = RunConfig::default();
        let s = b.write(dir.path(), &cfg, 0.0).unwrap();
        assert!(s.passed());
        let body = std::fs::read(dir.path().join("t.csv")).unwrap();
        assert_eq!(body, b"a,b\n1,5.00000000000000000e-1\n");
        let m: Manifest = serde_json::from_slice(&std::fs::read(manifest_path(dir.path())).unwrap()).unwrap();
        assert_eq!(m.files.len(), 2);
        assert_eq!(m.files[0].sha256, sha256_hex(&body));
        assert_eq!(m.config, cfg);
    }
}
