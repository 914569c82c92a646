use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::SweepSpec;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub subcommand: String,
    /// SHA-256 of the canonical config JSON.
    pub config_hash: String,
    pub outputs: Vec<String>,
}

pub fn config_hash(spec: &SweepSpec) -> String {
    hex::encode(Sha256::digest(spec.canonical_json().as_bytes()))
}

impl RunManifest {
    pub fn new(subcommand: &str, spec: &SweepSpec, outputs: Vec<String>) -> Self {
        RunManifest {
            tool_version: TOOL_VERSION.to_string(),
            subcommand: subcommand.to_string(),
            config_hash: config_hash(spec),
            outputs,
        }
    }
}
