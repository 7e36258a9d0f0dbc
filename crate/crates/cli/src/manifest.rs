//! Per-stage run manifests: config hash, input and output hashes, version.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

use crate::error::{CliError, Result};

pub const MANIFEST_DIR: &str = "manifests";

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Files under `dir`, sorted, as (`/`-joined relative name, path).
fn files_under(dir: &Path) -> Result<Vec<(String, std::path::PathBuf)>> {
    let mut files = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| CliError::Invariant(format!("walking {}: {e}", dir.display())))?;
        if entry.file_type().is_file() {
            let rel = entry.path().strip_prefix(dir).expect("walk stays under root");
            let name: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
            files.push((name.join("/"), entry.path().to_owned()));
        }
    }
    Ok(files)
}

/// No timestamps or absolute paths, so reruns reproduce it byte for byte.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Manifest {
    pub stage: String,
    pub version: String,
    pub config_sha256: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(stage: &str, config_sha256: &str) -> Self {
        Manifest {
            stage: stage.to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            config_sha256: config_sha256.to_owned(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn input(&mut self, name: &str, path: &Path) -> Result<()> {
        self.inputs.insert(name.to_owned(), sha256_file(path)?);
        Ok(())
    }

    pub fn input_dir(&mut self, prefix: &str, dir: &Path) -> Result<()> {
        for (name, path) in files_under(dir)? {
            self.inputs.insert(format!("{prefix}/{name}"), sha256_file(&path)?);
        }
        Ok(())
    }

    /// `name` is relative to the output directory.
    pub fn output(&mut self, out_dir: &Path, name: &str) -> Result<()> {
        self.outputs.insert(name.to_owned(), sha256_file(&out_dir.join(name))?);
        Ok(())
    }

    pub fn output_dir(&mut self, out_dir: &Path, name: &str) -> Result<()> {
        for (file, path) in files_under(&out_dir.join(name))? {
            self.outputs.insert(format!("{name}/{file}"), sha256_file(&path)?);
        }
        Ok(())
    }

    /// Writes `manifests/<stage>.json` under `out_dir`.
    pub fn write(&self, out_dir: &Path) -> Result<()> {
        let dir = out_dir.join(MANIFEST_DIR);
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        let path = dir.join(format!("{}.json", self.stage));
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }
}
