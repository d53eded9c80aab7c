//! Dataset ingestion: line-delimited JSON, one sample per line.
//!
//! A sample carries the target function's source, its callees with call
//! depths, provenance strings and a binary label. Targets that fail to
//! parse under the frontend are flagged `degraded`, never dropped.

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::frontend::parse_unit_str;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Vulnerable,
    Safe,
}

impl Label {
    pub fn is_vulnerable(self) -> bool {
        self == Label::Vulnerable
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalleeRecord {
    pub name: String,
    pub code: String,
    /// Call distance from the target; direct callees are depth 1.
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    #[serde(default)]
    pub cve: Option<String>,
    #[serde(default)]
    pub cwe: Option<String>,
    #[serde(default)]
    pub project: String,
    #[serde(default)]
    pub commit: String,
    pub target_name: String,
    pub target_code: String,
    #[serde(default)]
    pub callees: Vec<CalleeRecord>,
    pub label: Label,
    /// Post-fix version of the target, when known; enables contrastive
    /// few-shot exemplars.
    #[serde(default)]
    pub fixed_code: Option<String>,
    /// Set at load time when the target does not parse; such samples still
    /// evaluate, with raw-code context only.
    #[serde(skip)]
    pub degraded: bool,
}

pub fn load_dataset_str(text: &str) -> Result<Vec<SampleRecord>, EvalError> {
    let mut samples = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut sample: SampleRecord =
            serde_json::from_str(line).map_err(|e| EvalError::Schema {
                line: lineno,
                message: e.to_string(),
            })?;
        if sample.id.is_empty() {
            return Err(EvalError::Schema {
                line: lineno,
                message: "sample id must be nonempty".to_string(),
            });
        }
        if samples.iter().any(|s: &SampleRecord| s.id == sample.id) {
            return Err(EvalError::Schema {
                line: lineno,
                message: format!("duplicate sample id `{}`", sample.id),
            });
        }
        if let Some(bad) = sample.callees.iter().find(|c| c.depth < 1) {
            return Err(EvalError::Schema {
                line: lineno,
                message: format!("callee `{}` has depth {} (must be >= 1)", bad.name, bad.depth),
            });
        }
        sample.degraded = parse_unit_str("sample", &sample.target_code)
            .map(|u| u.function(&sample.target_name).is_none())
            .unwrap_or(true);
        samples.push(sample);
    }
    Ok(samples)
}

pub fn load_dataset(path: &std::path::Path) -> Result<Vec<SampleRecord>, EvalError> {
    let text = std::fs::read_to_string(path)?;
    load_dataset_str(&text)
}
