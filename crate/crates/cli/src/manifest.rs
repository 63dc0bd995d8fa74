use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Everything needed to rerun a subcommand: the literal argument vector,
/// the configuration after defaults were applied, and the files touched.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub version: &'static str,
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub inputs: BTreeMap<&'static str, PathBuf>,
    pub outputs: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub wall_time_ms: f64,
}

impl RunManifest {
    pub fn new(subcommand: &'static str, config: impl Serialize) -> Result<Self> {
        Ok(Self {
            subcommand,
            version: env!("CARGO_PKG_VERSION"),
            argv: std::env::args().collect(),
            config: serde_json::to_value(config)?,
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            seed: None,
            wall_time_ms: 0.0,
        })
    }

    pub fn input(mut self, role: &'static str, path: Option<&Path>) -> Self {
        if let Some(p) = path {
            self.inputs.insert(role, p.to_path_buf());
        }
        self
    }

    /// Writes the manifest next to the first output as `<output>.manifest.json`.
    pub fn write(&self) -> Result<PathBuf> {
        let first = self.outputs.first().context("manifest has no output to sit next to")?;
        let path = manifest_path(first);
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// Truth sidecar written by `synth` next to the spectrum: `obs.csv` -> `obs.truth.cfg`.
pub fn truth_sidecar(spectrum: &Path) -> PathBuf {
    spectrum.with_extension("truth.cfg")
}
