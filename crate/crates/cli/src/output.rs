//! Output files and the run manifest. Every file is rendered in memory,
//! hashed, then written, so the manifest checksums are those of the bytes on
//! disk.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Shortest round-trip decimal.
pub fn num(v: f64) -> String {
    v.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

impl OutputSet {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[OutputFile] {
        &self.files
    }

    pub fn write_bytes(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, data).map_err(CliError::io(&path))?;
        self.files.push(OutputFile {
            path: name.to_string(),
            bytes: data.len() as u64,
            sha256: hex::encode(Sha256::digest(data)),
        });
        Ok(())
    }

    pub fn write_csv<I, R>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
    {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io { path: path.clone(), source: e.into() };
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(row).map_err(io)?;
        }
        let data = w.into_inner().map_err(|e| CliError::Io { path: path.clone(), source: e.into_error() })?;
        self.write_bytes(name, &data)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut data = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io { path: self.dir.join(name), source: e.into() })?;
        data.push(b'\n');
        self.write_bytes(name, &data)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<OutputFile>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(MANIFEST_NAME);
        let mut data = serde_json::to_vec_pretty(self).map_err(|e| CliError::Io { path: path.clone(), source: e.into() })?;
        data.push(b'\n');
        std::fs::write(&path, data).map_err(CliError::io(&path))
    }
}

/// Recomputes every checksum listed in a manifest. Returns the files that
/// are missing or do not match.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>, CliError> {
    let path = dir.join(MANIFEST_NAME);
    let text = std::fs::read_to_string(&path).map_err(CliError::io(&path))?;
    let manifest: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Io { path: path.clone(), source: e.into() })?;
    let mut bad = Vec::new();
    for f in manifest["outputs"].as_array().into_iter().flatten() {
        let name = f["path"].as_str().unwrap_or_default();
        let ok = std::fs::read(dir.join(name))
            .map(|data| hex::encode(Sha256::digest(&data)) == f["sha256"].as_str().unwrap_or_default())
            .unwrap_or(false);
        if !ok {
            bad.push(name.to_string());
        }
    }
    Ok(bad)
}
