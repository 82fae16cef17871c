//! Resolved run configuration, written next to every command's outputs
//! so a run can be reproduced from the recorded file alone.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// Every knob a command resolved before running. Optional fields stay
/// `None` when the command does not use them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub schema: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gammas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub metric: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub groupwise: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub proxy: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub classifier: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub drop: Option<Vec<String>>,
    pub out: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub format: Option<String>,
}

impl RunConfig {
    pub fn write(&self, dir: &std::path::Path) -> std::io::Result<()> {
        let path = dir.join(format!("{}_config.json", self.command));
        let mut text = serde_json::to_string_pretty(self).expect("config serializes");
        text.push('\n');
        std::fs::write(path, text)
    }
}
