use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Bumped whenever a report layout changes.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub schema_version: u32,
    pub command: String,
    /// Arguments as given, enough to replay the run.
    pub argv: Vec<String>,
    /// Every flag after defaults were applied.
    pub flags: serde_json::Value,
    pub seed: Option<u64>,
    /// sha256 of each input file, keyed by path.
    pub inputs: BTreeMap<String, String>,
    /// sha256 of each output, keyed by path; stdout is keyed `-`.
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Default)]
pub struct Recorder {
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    /// The file the manifest sits next to by default.
    pub primary: Option<PathBuf>,
}

impl Recorder {
    pub fn input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.insert(path.display().to_string(), sha256_hex(bytes));
    }

    pub fn output(&mut self, key: &str, bytes: &[u8]) {
        self.outputs.insert(key.to_string(), sha256_hex(bytes));
    }

    pub fn default_location(&self) -> Option<PathBuf> {
        let primary = self.primary.as_ref()?;
        if primary.is_dir() {
            return Some(primary.join("manifest.json"));
        }
        let mut name = primary.file_name()?.to_os_string();
        name.push(".manifest.json");
        Some(primary.with_file_name(name))
    }
}
