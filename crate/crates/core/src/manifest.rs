use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Provenance embedded in every output file.
///
/// There is no wall-clock timestamp unless the caller supplies one (the CLI
/// reads `SOURCE_DATE_EPOCH`), so rerunning a manifest reproduces its output
/// byte for byte.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub flags: BTreeMap<String, String>,
    pub version: String,
    pub dataset_fingerprint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>) -> Self {
        RunManifest {
            command: command.into(),
            flags: BTreeMap::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            dataset_fingerprint: None,
            timestamp: None,
        }
    }

    pub fn flag(mut self, name: &str, value: impl ToString) -> Self {
        self.flags.insert(name.to_string(), value.to_string());
        self
    }

    pub fn fingerprint(mut self, fp: impl Into<String>) -> Self {
        self.dataset_fingerprint = Some(fp.into());
        self
    }

    pub fn timestamp(mut self, ts: Option<String>) -> Self {
        self.timestamp = ts;
        self
    }
}
