//! Versioned JSON model files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use classicml::Matrix;

use crate::error::{CliError, CliResult};
use crate::models::Fitted;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: u64,
    pub n_features: usize,
    pub n_samples: usize,
    pub feature_names: Vec<String>,
    pub label_column: Option<String>,
}

/// Per-feature training mean and standard deviation (divisor n; zero spread stored as 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Standardizer {
        let n = x.rows() as f64;
        let means: Vec<f64> = (0..x.cols()).map(|j| x.column(j).iter().sum::<f64>() / n).collect();
        let scales = (0..x.cols())
            .map(|j| {
                let var = x.column(j).iter().map(|v| (v - means[j]).powi(2)).sum::<f64>() / n;
                let s = var.sqrt();
                if s > 0.0 { s } else { 1.0 }
            })
            .collect();
        Standardizer { means, scales }
    }

    pub fn apply(&self, x: &Matrix) -> CliResult<Matrix> {
        if x.cols() != self.means.len() {
            return Err(CliError::data(format!("expected {} features, found {}", self.means.len(), x.cols())));
        }
        let mut out = x.clone();
        for i in 0..out.rows() {
            for ((v, m), s) in out.row_mut(i).iter_mut().zip(&self.means).zip(&self.scales) {
                *v = (*v - m) / s;
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u64,
    pub model_kind: String,
    pub hyperparameters: BTreeMap<String, Value>,
    pub metadata: Metadata,
    pub standardizer: Option<Standardizer>,
    /// Class names in index order, for classifiers.
    pub labels: Option<Vec<String>>,
    pub model: Fitted,
}

impl ModelFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model files always serialize");
        s.push('\n');
        s
    }

    /// Parses a model file, checking `format_version` before reading anything else.
    pub fn from_json(text: &str) -> CliResult<ModelFile> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::data(format!("model file is not valid JSON: {e}")))?;
        match value.get("format_version").and_then(Value::as_u64) {
            Some(FORMAT_VERSION) => {}
            Some(v) => return Err(CliError::data(format!("unsupported model format_version {v} (expected {FORMAT_VERSION})"))),
            None => return Err(CliError::data("model file has no format_version")),
        }
        serde_json::from_value(value).map_err(|e| CliError::data(format!("malformed model file: {e}")))
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        std::fs::write(path, self.to_json()).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> CliResult<ModelFile> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        ModelFile::from_json(&text)
    }

    /// Applies the stored standardizer (if any) after checking the feature count.
    pub fn prepare(&self, x: &Matrix) -> CliResult<Matrix> {
        if x.cols() != self.metadata.n_features {
            return Err(CliError::data(format!(
                "model expects {} features, input has {}",
                self.metadata.n_features,
                x.cols()
            )));
        }
        match &self.standardizer {
            Some(s) => s.apply(x),
            None => Ok(x.clone()),
        }
    }
}
