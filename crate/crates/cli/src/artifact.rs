use crate::error::CliError;
use extreme_conformal::{CalibrationConfig, ConfidenceSpec, ConformalCorrection, Sidedness};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const TOOL: &str = "xcp";

/// A calibrated correction with everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionArtifact {
    pub tool: String,
    pub version: String,
    /// Creation time; not part of the reproducible content.
    pub created_unix: u64,
    /// SHA-256 of the calibration file bytes.
    pub input_sha256: String,
    pub n_scores: usize,
    pub sidedness: Sidedness,
    pub spec: ConfidenceSpec,
    pub settings: CalibrationConfig,
    pub correction: ConformalCorrection,
}

impl CorrectionArtifact {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data("io", format!("{}: {e}", path.display())))?;
        let a: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::data("artifact", format!("{}: {e}", path.display())))?;
        if a.tool != TOOL {
            return Err(CliError::data(
                "artifact",
                format!("not an {TOOL} artifact (tool = '{}')", a.tool),
            ));
        }
        if a.sidedness != a.correction.sidedness {
            return Err(CliError::data("artifact", "sidedness fields disagree"));
        }
        Ok(a)
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}
