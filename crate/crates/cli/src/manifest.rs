use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// `manifest.json`, written next to the outputs of every successful run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the canonical form of the resolved configuration.
    pub config_digest: String,
    pub tool_version: String,
    pub seed: u64,
    pub threads: usize,
    /// File names relative to the output directory.
    pub outputs: Vec<String>,
    /// Seconds.
    pub wall_time: f64,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let text =
            serde_json::to_string_pretty(self).map_err(|e| CliError::Validation(e.to_string()))?;
        std::fs::write(dir.join("manifest.json"), text + "\n")?;
        Ok(())
    }
}
