//! Interval-quality metrics: PICP/MPIW, error-retention and calibration
//! curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coverage and width summary plus diagnostic curves, as emitted by the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Fraction of targets captured by the intervals.
    pub picp: f64,
    /// Mean interval width in target units.
    pub mpiw: f64,
    /// Per-point capture indicator.
    pub capture: Vec<u8>,
    /// `(retained_fraction, mean_abs_error)` pairs.
    pub retention_curve: Vec<(f64, f64)>,
    /// `(tau, empirical_fraction)` pairs; empty when no quantile
    /// predictions were supplied.
    pub calibration_curve: Vec<(f64, f64)>,
}

/// Prediction-interval coverage probability and mean width.
///
/// A point on the interval boundary counts as captured (closed interval).
pub fn picp_mpiw(y: &[f64], lower: &[f64], upper: &[f64]) -> Result<(f64, f64, Vec<u8>)> {
    if y.len() != lower.len() || y.len() != upper.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), got: lower.len().min(upper.len()) });
    }
    if y.is_empty() {
        return Err(Error::InvalidInput("picp/mpiw need at least one point".into()));
    }
    if let Some(i) = lower.iter().zip(upper).position(|(l, u)| l > u) {
        return Err(Error::InvalidInput(format!(
            "lower bound exceeds upper bound at index {i}"
        )));
    }
    let capture: Vec<u8> = y
        .iter()
        .zip(lower.iter().zip(upper))
        .map(|(&yi, (&l, &u))| u8::from(l <= yi && yi <= u))
        .collect();
    let picp = capture.iter().map(|&k| k as f64).sum::<f64>() / y.len() as f64;
    let mpiw = lower.iter().zip(upper).map(|(l, u)| u - l).sum::<f64>() / y.len() as f64;
    Ok((picp, mpiw, capture))
}

/// Error-retention curve: points sorted by ascending uncertainty score, mean
/// absolute error of the first `k` points at retained fraction `k/n`.
///
/// Score ties are broken by original index, so the curve is deterministic.
pub fn error_retention(abs_errors: &[f64], scores: &[f64]) -> Result<Vec<(f64, f64)>> {
    if abs_errors.len() != scores.len() {
        return Err(Error::DimensionMismatch { expected: abs_errors.len(), got: scores.len() });
    }
    if abs_errors.is_empty() {
        return Err(Error::InvalidInput("error-retention needs at least one point".into()));
    }
    if let Some(bad) = scores.iter().chain(abs_errors.iter()).find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("error-retention input {bad}")));
    }
    let n = abs_errors.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    let mut curve = Vec::with_capacity(n);
    let mut running = 0.0;
    for (k, &idx) in order.iter().enumerate() {
        running += abs_errors[idx];
        curve.push(((k + 1) as f64 / n as f64, running / (k + 1) as f64));
    }
    Ok(curve)
}

/// Calibration curve: per quantile level, the empirical fraction of targets
/// at or below the predicted quantile.
///
/// `quantile_predictions` is row-major `n x taus.len()`, columns ordered by
/// strictly increasing `taus` in `(0,1)`.
pub fn calibration_curve(
    y: &[f64],
    quantile_predictions: &[Vec<f64>],
    taus: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if taus.is_empty() {
        return Err(Error::InvalidInput("calibration needs at least one tau".into()));
    }
    if taus.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
        return Err(Error::OutOfUnitInterval(
            *taus.iter().find(|t| !(**t > 0.0 && **t < 1.0)).unwrap(),
        ));
    }
    if taus.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("taus must be strictly increasing".into()));
    }
    if y.is_empty() || y.len() != quantile_predictions.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), got: quantile_predictions.len() });
    }
    if let Some(i) = quantile_predictions.iter().position(|r| r.len() != taus.len()) {
        return Err(Error::InvalidInput(format!(
            "quantile prediction row {i} has {} entries, expected {}",
            quantile_predictions[i].len(),
            taus.len()
        )));
    }
    let n = y.len() as f64;
    let mut curve = Vec::with_capacity(taus.len());
    for (c, &tau) in taus.iter().enumerate() {
        let below = y
            .iter()
            .zip(quantile_predictions)
            .filter(|(yi, row)| **yi <= row[c])
            .count() as f64;
        curve.push((tau, below / n));
    }
    Ok(curve)
}
