//! Run manifests written next to every artifact.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to repeat a run: the command, its fully resolved
/// configuration, seeds, and digests of the files read and written.
///
/// Paths are recorded as given on the command line and no clock values are
/// stored, so identical runs produce identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    pub fn new(command: &str, config: impl Serialize) -> CliResult<Self> {
        Ok(Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config: serde_json::to_value(config)?,
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    pub fn seed(mut self, name: &str, seed: u64) -> Self {
        self.seeds.insert(name.into(), seed);
        self
    }

    /// Records a file, or every `*.log` file of a directory.
    pub fn input(mut self, path: &Path) -> CliResult<Self> {
        self.inputs.extend(digests(path)?);
        Ok(self)
    }

    pub fn output(mut self, path: &Path) -> CliResult<Self> {
        self.outputs.push(digest(path)?);
        Ok(self)
    }

    pub fn write(&self, path: &Path) -> CliResult {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}

/// Manifest location for a file artifact.
pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    artifact.with_file_name(name)
}

fn digest(path: &Path) -> CliResult<FileDigest> {
    let bytes = fs::read(path)?;
    let hash = Sha256::digest(&bytes);
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: hash.iter().map(|b| format!("{b:02x}")).collect(),
    })
}

fn digests(path: &Path) -> CliResult<Vec<FileDigest>> {
    if !path.is_dir() {
        return Ok(vec![digest(path)?]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "log"))
        .collect();
    files.sort();
    files.iter().map(|p| digest(p)).collect()
}
