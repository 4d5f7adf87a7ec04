//! Run manifest: everything needed to reproduce a run's outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct InputFile {
    pub path: PathBuf,
    pub bytes: u64,
    pub sha256: String,
}

impl InputFile {
    pub fn hash(path: &Path) -> Result<Self, CliError> {
        let data =
            std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let digest = Sha256::digest(&data);
        Ok(Self {
            path: path.to_path_buf(),
            bytes: data.len() as u64,
            sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        })
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub threads: usize,
    pub parameters: BTreeMap<String, Value>,
    pub inputs: Vec<InputFile>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub results: BTreeMap<String, Value>,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, text + "\n")
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}
