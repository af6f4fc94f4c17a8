use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use camox::ingest::dataset::{file_sha256, tree_sha256};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    /// Path relative to the manifest's directory, `/`-separated.
    pub path: String,
    pub sha256: String,
}

/// Provenance record written next to every command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub tool_version: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub dataset_root: Option<PathBuf>,
    /// Content hash of the input dataset tree, excluding its manifest.
    pub dataset_hash: Option<String>,
    pub artifacts: Vec<Artifact>,
    pub started_unix: f64,
    pub finished_unix: f64,
}

pub fn now_unix() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

pub fn dataset_hash(root: &Path) -> CliResult<String> {
    Ok(tree_sha256(root, &[MANIFEST_FILE])?)
}

fn collect(dir: &Path, rel: &str, out: &mut Vec<(String, PathBuf)>) -> CliResult<()> {
    let mut entries: Vec<_> = fs::read_dir(dir)
        .map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok())
        .collect();
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let name = e.file_name().to_string_lossy().into_owned();
        let rel_path = if rel.is_empty() { name.clone() } else { format!("{rel}/{name}") };
        let path = e.path();
        if path.is_dir() {
            collect(&path, &rel_path, out)?;
        } else if rel_path != MANIFEST_FILE {
            out.push((rel_path, path));
        }
    }
    Ok(())
}

/// Hashes every file under `dir` except the manifest itself.
pub fn artifacts(dir: &Path) -> CliResult<Vec<Artifact>> {
    let mut files = Vec::new();
    collect(dir, "", &mut files)?;
    files
        .into_iter()
        .map(|(path, full)| {
            Ok(Artifact {
                path,
                sha256: file_sha256(&full)?,
            })
        })
        .collect()
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, config: &impl Serialize, started_unix: f64) -> Self {
        RunManifest {
            command: command.into(),
            argv: std::env::args().collect(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            seed,
            config: serde_json::to_value(config).expect("config serializes"),
            dataset_root: None,
            dataset_hash: None,
            artifacts: Vec::new(),
            started_unix,
            finished_unix: started_unix,
        }
    }

    /// Lists the artifacts in `dir` and writes the manifest there.
    pub fn finish(mut self, dir: &Path) -> CliResult<RunManifest> {
        self.artifacts = artifacts(dir)?;
        self.finished_unix = now_unix();
        let path = dir.join(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(&self).expect("manifest serializes");
        fs::write(&path, json + "\n").map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        Ok(self)
    }
}
