use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::data::{sha256_hex, InputRecord};
use super::Failure;
use crate::solvers::SolverConfig;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct ArtifactRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Record of one command run: what went in, what came out.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: Vec<String>,
    pub inputs: Vec<InputRecord>,
    pub config: Option<SolverConfig>,
    pub outputs: Vec<ArtifactRecord>,
    /// Seconds since the Unix epoch; `SOURCE_DATE_EPOCH` when set.
    pub timestamp: u64,
}

pub fn timestamp() -> u64 {
    if let Some(epoch) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.trim().parse().ok()) {
        return epoch;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Writes artifacts into one directory and records their hashes.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<ArtifactRecord>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, Failure> {
        std::fs::create_dir_all(root).map_err(|e| Failure::Data(format!("{}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, Failure> {
        let path = self.root.join(name);
        std::fs::write(&path, contents).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        self.written.push(ArtifactRecord {
            path: name.to_string(),
            sha256: sha256_hex(contents.as_bytes()),
            bytes: contents.len(),
        });
        Ok(path)
    }

    pub fn written(&self) -> &[ArtifactRecord] {
        &self.written
    }

    pub fn finish(
        self,
        command: &str,
        args: Vec<String>,
        inputs: Vec<InputRecord>,
        config: Option<SolverConfig>,
    ) -> Result<RunManifest, Failure> {
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            args,
            inputs,
            config,
            outputs: self.written,
            timestamp: timestamp(),
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::Internal(e.to_string()))?;
        let path = self.root.join(MANIFEST_FILE);
        std::fs::write(&path, text + "\n").map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        Ok(manifest)
    }
}
