use std::path::{Path, PathBuf};

use chanorder::document::{AnyChannel, Document};
use chanorder::ordering::{DegradabilityVerdict, KmCandidate, KmConfig, ViolationReport};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// A parsed input file with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub sha256: String,
    pub document: Document,
}

impl InputRecord {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let text =
            std::str::from_utf8(&bytes).map_err(|_| CliError::Input(format!("{}: not valid UTF-8", path.display())))?;
        let document = Document::parse(text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Ok(Self {
            path: path.to_path_buf(),
            label: document.label().map(str::to_owned),
            sha256: hex::encode(Sha256::digest(&bytes)),
            document,
        })
    }

    pub fn channel(&self) -> Result<AnyChannel, CliError> {
        self.document.to_channel().map_err(|e| CliError::Input(format!("{}: {e}", self.path.display())))
    }

    pub fn name(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.path.display().to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sdp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Outcome {
    Verdict(DegradabilityVerdict),
    Measure {
        quantity: String,
        value: f64,
        /// Optimal POVM elements or decoder Choi operator, as `[re, im]` rows.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        optimizer: Option<Vec<Vec<Vec<[f64; 2]>>>>,
    },
    Violations(ViolationReport),
    KmSearch {
        config: KmConfig,
        /// Exploratory: sampling cannot certify less-noisy.
        candidates: Vec<KmCandidate>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub inputs: Vec<InputRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notices: Vec<String>,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    /// Omitted for seeded commands so their output is byte-reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}
