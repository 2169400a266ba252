pub mod analytic;
pub mod fit;
pub mod fixture;
pub mod odmr;
pub mod relaxometry;
pub mod scan;
pub mod waveform;

use serde::{Deserialize, Serialize};

use crate::config::DatasetEntry;

/// Dataset list written by `gen-fixture` and read by `fit`. Paths are
/// relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub generator: serde_json::Value,
    #[serde(default)]
    pub datasets: Vec<DatasetEntry>,
}

/// File-name-safe version of a label.
pub(crate) fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}
