//! Check results and the run report emitted by the CLI.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// One named check: the worst residual seen and whether it met tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Per-point or per-sample residuals, kept in memory only.
    #[serde(skip)]
    pub samples: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, max_residual: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.into(),
            max_residual,
            tolerance,
            // NaN residuals never pass
            pass: max_residual <= tolerance,
            samples: Vec::new(),
            detail: None,
        }
    }

    pub fn from_samples(name: impl Into<String>, samples: Vec<f64>, tolerance: f64) -> Self {
        let max = samples.iter().fold(0.0f64, |m, r| {
            if r.is_nan() || m.is_nan() {
                f64::NAN
            } else {
                m.max(r.abs())
            }
        });
        let mut c = CheckResult::new(name, max, tolerance);
        c.samples = samples;
        c
    }

    /// A check that could not be evaluated at all.
    pub fn errored(name: impl Into<String>, tolerance: f64, message: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            max_residual: f64::INFINITY,
            tolerance,
            pass: false,
            samples: Vec::new(),
            detail: Some(message.into()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub model: String,
    pub config_digest: String,
    pub pass: bool,
    pub checks: Vec<CheckResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl RunReport {
    pub fn new(model: impl Into<String>, config_digest: String, checks: Vec<CheckResult>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        RunReport {
            model: model.into(),
            config_digest,
            pass,
            checks,
            wall_time_s: None,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Hex SHA-256 of a canonical description of the run inputs.
pub fn digest(text: &str) -> String {
    let hash = Sha256::digest(text.as_bytes());
    hash.iter().map(|b| format!("{b:02x}")).collect()
}
