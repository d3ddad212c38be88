use std::path::{Path, PathBuf};

use lvr_core::experiments::write_atomic;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::settings::Settings;

#[derive(Clone, Debug, Serialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Everything needed to re-run a command bit-exactly.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub command: &'static str,
    pub config: &'a Settings,
    pub seed: u64,
    pub workers: usize,
    pub engine_version: &'static str,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<OutputDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `bytes` atomically and returns its digest record.
pub fn write_output(path: &Path, bytes: &[u8]) -> Result<OutputDigest, CliError> {
    write_atomic(path, bytes).map_err(|e| match e {
        lvr_core::LvrError::Io(source) => CliError::Io {
            context: format!("writing {}", path.display()),
            source,
        },
        other => other.into(),
    })?;
    Ok(OutputDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(bytes),
        bytes: bytes.len() as u64,
    })
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

impl RunManifest<'_> {
    pub fn write(&self, path: &Path) -> Result<OutputDigest, CliError> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        write_output(path, text.as_bytes())
    }
}
