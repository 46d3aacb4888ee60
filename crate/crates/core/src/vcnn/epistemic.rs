//! Simultaneous confidence bands from bootstrapped head predictions.
//!
//! Each head is one simulation of the trained predictor. Deviations from the
//! cross-head mean, standardized by the cross-head standard error, give one
//! maximal deviation per simulation; the empirical `1 - alpha` quantile of
//! those maxima is the critical value `r` that scales the per-location
//! standard errors into a simultaneous band.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Cross-head band statistics at a set of locations.
#[derive(Debug, Clone)]
pub struct SimultaneousBand {
    /// Cross-head mean per location.
    pub center: Vec<f64>,
    /// Cross-head standard deviation (ddof = 1) per location.
    pub se: Vec<f64>,
    /// Critical value: empirical `1 - alpha` quantile of the per-simulation
    /// maxima of standardized absolute deviations.
    pub r: f64,
    /// Per-simulation maxima (diagnostic).
    pub max_deviations: Vec<f64>,
    /// True when every location has zero cross-head dispersion; `r` is then 0
    /// and the band collapses onto the prediction.
    pub degenerate: bool,
}

/// Computes the simultaneous band from a `heads x locations` prediction
/// matrix.
pub fn simultaneous_band(predictions: &Matrix, alpha: f64) -> Result<SimultaneousBand> {
    let s = predictions.nrows();
    let l = predictions.ncols();
    if s < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 heads, got {s}")));
    }
    if l == 0 {
        return Err(Error::InvalidInput("need at least one test location".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::OutOfUnitInterval(alpha));
    }

    let mut center = vec![0.0; l];
    for i in 0..s {
        for j in 0..l {
            center[j] += predictions[(i, j)];
        }
    }
    for c in center.iter_mut() {
        *c /= s as f64;
    }

    let mut se = vec![0.0; l];
    for i in 0..s {
        for j in 0..l {
            let d = predictions[(i, j)] - center[j];
            se[j] += d * d;
        }
    }
    for v in se.iter_mut() {
        *v = (*v / (s as f64 - 1.0)).sqrt();
    }

    let live: Vec<usize> = (0..l).filter(|&j| se[j] > 0.0).collect();
    if live.is_empty() {
        return Ok(SimultaneousBand {
            center,
            se,
            r: 0.0,
            max_deviations: vec![0.0; s],
            degenerate: true,
        });
    }

    let mut max_deviations = Vec::with_capacity(s);
    for i in 0..s {
        let mut worst = 0.0f64;
        for &j in &live {
            let dev = (predictions[(i, j)] - center[j]).abs() / se[j];
            worst = worst.max(dev);
        }
        max_deviations.push(worst);
    }

    let r = empirical_upper_quantile(&max_deviations, 1.0 - alpha);
    Ok(SimultaneousBand { center, se, r, max_deviations, degenerate: false })
}

/// Order-statistic quantile: the `ceil(p * n)`-th smallest value.
fn empirical_upper_quantile(values: &[f64], p: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let rank = (p * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_rng;
    use rand::Rng;

    #[test]
    fn identical_heads_collapse_to_zero_width() {
        let preds = Matrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        let band = simultaneous_band(&preds, 0.05).unwrap();
        assert!(band.degenerate);
        assert_eq!(band.r, 0.0);
        assert_eq!(band.se, vec![0.0, 0.0]);
    }

    #[test]
    fn center_and_se_match_hand_computation() {
        let preds = Matrix::from_rows(&[vec![1.0], vec![3.0]]).unwrap();
        let band = simultaneous_band(&preds, 0.1).unwrap();
        assert_eq!(band.center, vec![2.0]);
        // ddof = 1: variance = ((1-2)^2 + (3-2)^2)/1 = 2.
        assert!((band.se[0] - 2.0f64.sqrt()).abs() < 1e-15);
        assert!(band.r > 0.0);
    }

    #[test]
    fn r_is_nondecreasing_as_alpha_shrinks() {
        let mut rng = derive_rng(4, "band");
        let preds = Matrix::from_rows(
            &(0..30)
                .map(|_| (0..10).map(|_| rng.random::<f64>()).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let mut last = 0.0;
        for &alpha in &[0.5, 0.2, 0.1, 0.05, 0.01] {
            let band = simultaneous_band(&preds, alpha).unwrap();
            assert!(band.r >= last, "r must grow as alpha falls");
            assert!(band.r > 0.0);
            last = band.r;
        }
    }

    #[test]
    fn quantile_convention_on_known_values() {
        // 10 maxima 1..10; p = 0.95 -> ceil(9.5) = 10th smallest.
        let values: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(empirical_upper_quantile(&values, 0.95), 10.0);
        assert_eq!(empirical_upper_quantile(&values, 0.5), 5.0);
        assert_eq!(empirical_upper_quantile(&values, 0.05), 1.0);
    }

    #[test]
    fn zero_se_locations_are_skipped_not_fatal() {
        // Second column identical across heads; band must come from the
        // first column only.
        let preds = Matrix::from_rows(&[vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]]).unwrap();
        let band = simultaneous_band(&preds, 0.05).unwrap();
        assert!(!band.degenerate);
        assert_eq!(band.se[1], 0.0);
        assert!(band.r > 0.0);
    }

    #[test]
    fn rejects_insufficient_heads() {
        let preds = Matrix::from_rows(&[vec![1.0]]).unwrap();
        assert!(simultaneous_band(&preds, 0.05).is_err());
    }
}
