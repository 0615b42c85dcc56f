use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

/// Everything needed to rerun a command exactly.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub outputs: Vec<String>,
    pub threads: usize,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn new<P: Serialize>(
        subcommand: &str,
        params: &P,
        seed: Option<u64>,
        outputs: Vec<PathBuf>,
        started: Instant,
    ) -> Result<Self> {
        Ok(Self {
            subcommand: subcommand.to_string(),
            params: serde_json::to_value(params)?,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            threads: rayon::current_num_threads(),
            wall_clock_seconds: started.elapsed().as_secs_f64(),
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// `run.csv` -> `run.manifest.json`.
pub fn manifest_path_for(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}
