//! Per-point interval report and its CSV/JSON serializations.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::vcnn::VcnnConfig;

/// Everything the interval operations produced for a test set.
///
/// CSV columns: `x1..xp, y_hat, y_Le, y_Ue, y_La, y_Ua, L, U`. The JSON form
/// additionally carries the critical value, per-point standard errors,
/// diagnostic flags, the config echo and the RNG identifier.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalReport {
    pub features: Matrix,
    pub y_hat: Vec<f64>,
    pub epistemic_lower: Vec<f64>,
    pub epistemic_upper: Vec<f64>,
    pub aleatoric_lower: Vec<f64>,
    pub aleatoric_upper: Vec<f64>,
    pub envelope_lower: Vec<f64>,
    pub envelope_upper: Vec<f64>,
    pub r: f64,
    pub se: Vec<f64>,
    pub head_mean: Vec<f64>,
    pub degenerate_ensemble: bool,
    pub aleatoric_fallback: Vec<bool>,
    pub alpha: f64,
    pub rng: String,
    pub config: VcnnConfig,
}

impl IntervalReport {
    pub fn len(&self) -> usize {
        self.y_hat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_hat.is_empty()
    }

    /// Envelope width per point, the uncertainty score used by
    /// error-retention curves.
    pub fn envelope_width(&self) -> Vec<f64> {
        self.envelope_lower
            .iter()
            .zip(&self.envelope_upper)
            .map(|(l, u)| u - l)
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        let p = self.features.ncols();
        let mut header: Vec<String> = (1..=p).map(|j| format!("x{j}")).collect();
        for name in ["y_hat", "y_Le", "y_Ue", "y_La", "y_Ua", "L", "U"] {
            header.push(name.to_string());
        }
        writer
            .write_record(&header)
            .map_err(|e| Error::Csv { row: 0, message: e.to_string() })?;
        for i in 0..self.len() {
            let mut record: Vec<String> =
                self.features.row(i).iter().map(f64::to_string).collect();
            for v in [
                self.y_hat[i],
                self.epistemic_lower[i],
                self.epistemic_upper[i],
                self.aleatoric_lower[i],
                self.aleatoric_upper[i],
                self.envelope_lower[i],
                self.envelope_upper[i],
            ] {
                record.push(v.to_string());
            }
            writer
                .write_record(&record)
                .map_err(|e| Error::Csv { row: i + 2, message: e.to_string() })?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }
}
