use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

/// Writes stage outputs under one root. An existing file is first renamed
/// to `<name>.bak`, replacing any older backup.
pub(crate) struct Outputs {
    root: PathBuf,
    pub written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(root: &Path) -> Self {
        Outputs { root: root.to_path_buf(), written: Vec::new() }
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.path(rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        if path.exists() {
            let mut bak = path.clone().into_os_string();
            bak.push(".bak");
            std::fs::rename(&path, bak)?;
        }
        std::fs::write(&path, bytes)?;
        self.written.push(PathBuf::from(rel));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(rel, s.as_bytes())
    }

    /// Reads an input produced by an earlier stage.
    pub fn read(&self, rel: &str) -> Result<String> {
        let path = self.path(rel);
        std::fs::read_to_string(&path).map_err(|e| Error::MissingInput(format!("{}: {e}", path.display())))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Ok,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageEntry {
    pub status: StageStatus,
    /// Paths relative to the output directory. Empty for failed stages.
    pub files: Vec<PathBuf>,
    pub wall_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// SHA-256 of the effective config in canonical JSON, output directory
    /// excluded.
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub versions: BTreeMap<String, String>,
    pub stages: BTreeMap<String, StageEntry>,
}

pub const MANIFEST: &str = "manifest.json";

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let mut v = serde_json::to_value(cfg).expect("config serializes");
    v.as_object_mut().expect("config is an object").remove("out_dir");
    let canonical = serde_json::to_vec(&v).expect("value serializes");
    Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        let versions = BTreeMap::from([("tnqaoa".to_string(), env!("CARGO_PKG_VERSION").to_string())]);
        RunManifest { config_hash: config_hash(cfg), config: cfg.clone(), versions, stages: BTreeMap::new() }
    }

    /// The manifest in `out`, or a fresh one when it is absent or belongs to
    /// a different config.
    pub fn load_or_new(out: &Path, cfg: &ExperimentConfig) -> Self {
        let fresh = Self::new(cfg);
        match std::fs::read_to_string(out.join(MANIFEST)).ok().and_then(|s| serde_json::from_str::<Self>(&s).ok()) {
            Some(m) if m.config_hash == fresh.config_hash => m,
            _ => fresh,
        }
    }

    /// Writes the manifest without keeping a backup.
    pub fn save(&self, out: &Path) -> Result<()> {
        std::fs::create_dir_all(out)?;
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        std::fs::write(out.join(MANIFEST), s)?;
        Ok(())
    }
}
