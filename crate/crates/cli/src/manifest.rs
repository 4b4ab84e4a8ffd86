use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "run_manifest.json";

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    /// Latest run of each subcommand.
    pub steps: BTreeMap<String, Step>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct Step {
    pub config_sha256: String,
    pub seed: u64,
    pub config: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

fn label(path: &Path, out: &Path) -> String {
    path.strip_prefix(out).unwrap_or(path).display().to_string()
}

/// Merges one step's record into `<out>/run_manifest.json`.
pub fn record(out: &Path, step: &str, config: &str, seed: u64, inputs: &[PathBuf], outputs: &[PathBuf]) -> Result<()> {
    let path = out.join(MANIFEST_FILE);
    let mut manifest: Manifest = match std::fs::read(&path) {
        Ok(bytes) => serde_json::from_slice(&bytes).unwrap_or_default(),
        Err(_) => Manifest::default(),
    };
    manifest.tool_version = env!("CARGO_PKG_VERSION").to_string();
    let digests = |paths: &[PathBuf]| -> Result<BTreeMap<String, String>> {
        paths.iter().map(|p| Ok((label(p, out), file_digest(p)?))).collect()
    };
    manifest.steps.insert(
        step.to_string(),
        Step {
            config_sha256: sha256_hex(config.as_bytes()),
            seed,
            config: config.to_string(),
            inputs: digests(inputs)?,
            outputs: digests(outputs)?,
        },
    );
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
}
