//! Description of a CLI invocation, hashed into every report it produces.

use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Format;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub datasets: Vec<PathBuf>,
    pub model: Option<PathBuf>,
    pub configs: Vec<String>,
    pub batch_sizes: Vec<usize>,
    pub seed: u64,
    pub out: PathBuf,
    pub format: Format,
}

impl RunManifest {
    pub fn sha256(&self) -> String {
        let text = serde_json::to_string(self).expect("manifest serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

/// A payload together with the manifest that produced it.
#[derive(Debug, Serialize)]
pub struct Stamped<'a, T: Serialize> {
    pub manifest: &'a RunManifest,
    pub manifest_sha256: String,
    #[serde(flatten)]
    pub body: T,
}

impl<'a, T: Serialize> Stamped<'a, T> {
    pub fn new(manifest: &'a RunManifest, body: T) -> Self {
        Self {
            manifest,
            manifest_sha256: manifest.sha256(),
            body,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}
