//! Run outputs: every artifact is written through [`OutputSet`] so the final
//! manifest can list each file with its size and SHA-256 checksum.

use crate::Result;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutputFile {
    /// Path relative to the run directory.
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Collects artifacts under one run directory.
pub struct OutputSet {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl OutputSet {
    pub fn create(dir: &Path) -> Result<OutputSet> {
        fs::create_dir_all(dir)?;
        Ok(OutputSet {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Writes one artifact and records its checksum. Relative paths may use
    /// subdirectories (e.g. `fields/psi1.bin`), created on demand.
    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let full = self.dir.join(rel);
        if let Some(parent) = full.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&full, bytes)?;
        self.files.push(OutputFile {
            path: rel.to_string(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn files(&self) -> &[OutputFile] {
        &self.files
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub mode: String,
    pub seed: u64,
    pub workers: usize,
    /// Wall-clock duration of the run; the one field allowed to differ
    /// between otherwise identical runs.
    pub wall_seconds: f64,
    /// Verbatim configuration text the run was started from.
    pub config: String,
    pub outputs: Vec<OutputFile>,
}

/// Serializes the manifest into the run directory. The manifest itself is
/// not listed in its own outputs.
pub fn write_manifest(set: &OutputSet, manifest: &Manifest) -> Result<PathBuf> {
    let path = set.dir().join("manifest.json");
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}
