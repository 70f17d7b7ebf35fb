use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// JSON envelope written by every CLI subcommand.
///
/// `params` records every parameter actually used, defaults included, so a run can be
/// repeated from its own report. Keys are ordered, which keeps output byte-stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool_version: String,
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub results: Value,
    pub timestamp: String,
}

impl ReportDocument {
    pub fn new(command: impl Into<String>, params: BTreeMap<String, Value>, results: Value) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.into(),
            params,
            seed: None,
            results,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values are always serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
