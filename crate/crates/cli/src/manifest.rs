use std::collections::BTreeMap;
use std::path::Path;

use chrono::{SecondsFormat, Utc};
use lineguard_core::hashing::sha256_hex;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Provenance record written by every command next to its outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: String,
    pub input_digests: BTreeMap<String, String>,
    pub outcome: serde_json::Value,
}

impl RunManifest {
    pub fn start(command: &str, config_hash: String) -> Self {
        Self {
            command: command.into(),
            config_hash,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            started_at: now(),
            finished_at: String::new(),
            input_digests: BTreeMap::new(),
            outcome: serde_json::Value::Null,
        }
    }

    pub fn digest(&mut self, path: &Path, bytes: &[u8]) {
        self.input_digests.insert(path.display().to_string(), sha256_hex(bytes));
    }

    pub fn digest_file(&mut self, path: &Path) -> CliResult<()> {
        let bytes = std::fs::read(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        self.digest(path, &bytes);
        Ok(())
    }

    /// Writes `run_manifest.<command>.json` into `dir`.
    pub fn finish(mut self, dir: &Path, outcome: serde_json::Value) -> CliResult<()> {
        self.finished_at = now();
        self.outcome = outcome;
        let name = format!("run_manifest.{}.json", self.command.replace(' ', "_"));
        let text = serde_json::to_string_pretty(&self).expect("manifest serializes") + "\n";
        write_file(&dir.join(name), text.as_bytes())
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}
