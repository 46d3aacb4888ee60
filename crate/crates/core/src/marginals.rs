//! Univariate marginal estimation and pseudo-observations.
//!
//! Marginals are empirical CDFs interpolated linearly through Weibull
//! plotting positions `rank/(n+1)`, which keeps every probability strictly
//! inside `(0,1)` — copula densities blow up at the boundary, so neither the
//! CDF nor the pseudo-observations may ever touch 0 or 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// How the CDF/quantile behave outside the observed sample range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupportPolicy {
    /// CDF clamps to `[1/(n+1), n/(n+1)]`; quantile clamps to the sample range.
    Clamp,
    /// First/last interpolation segment extended linearly beyond the range.
    LinearExtrapolateTails,
}

/// Empirical marginal distribution with linear interpolation between
/// plotting positions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginalModel {
    sorted_samples: Vec<f64>,
    plotting_positions: Vec<f64>,
    support_policy: SupportPolicy,
}

/// Fits an empirical marginal on `samples` with the default clamp tail policy.
pub fn fit_marginal(samples: &[f64]) -> Result<MarginalModel> {
    fit_marginal_with_policy(samples, SupportPolicy::Clamp)
}

pub fn fit_marginal_with_policy(samples: &[f64], policy: SupportPolicy) -> Result<MarginalModel> {
    if samples.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "marginal fit needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("sample value {bad}")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let positions = (1..=sorted.len()).map(|r| r as f64 / (n + 1.0)).collect();
    Ok(MarginalModel { sorted_samples: sorted, plotting_positions: positions, support_policy: policy })
}

impl MarginalModel {
    pub fn support_policy(&self) -> SupportPolicy {
        self.support_policy
    }

    pub fn sample_min(&self) -> f64 {
        self.sorted_samples[0]
    }

    pub fn sample_max(&self) -> f64 {
        *self.sorted_samples.last().unwrap()
    }

    /// Interpolated empirical CDF. Always lands strictly inside (0,1).
    pub fn cdf(&self, x: f64) -> f64 {
        let s = &self.sorted_samples;
        let p = &self.plotting_positions;
        let n = s.len();
        if x <= s[0] {
            return match self.support_policy {
                SupportPolicy::Clamp => p[0],
                SupportPolicy::LinearExtrapolateTails => {
                    extrapolate(s[0], p[0], s[1], p[1], x).clamp(f64::MIN_POSITIVE, p[0])
                }
            };
        }
        if x >= s[n - 1] {
            return match self.support_policy {
                SupportPolicy::Clamp => p[n - 1],
                SupportPolicy::LinearExtrapolateTails => {
                    extrapolate(s[n - 2], p[n - 2], s[n - 1], p[n - 1], x)
                        .clamp(p[n - 1], 1.0 - f64::EPSILON)
                }
            };
        }
        // Largest index with s[j] <= x; ties collapse to the highest
        // plotting position so that quantile(cdf(x)) = x.
        let j = s.partition_point(|v| *v <= x) - 1;
        if s[j + 1] == s[j] {
            return p[j];
        }
        p[j] + (p[j + 1] - p[j]) * (x - s[j]) / (s[j + 1] - s[j])
    }

    /// Inverse of [`cdf`](Self::cdf) on the sample range.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::OutOfUnitInterval(u));
        }
        let s = &self.sorted_samples;
        let p = &self.plotting_positions;
        let n = s.len();
        if u <= p[0] {
            return Ok(match self.support_policy {
                SupportPolicy::Clamp => s[0],
                SupportPolicy::LinearExtrapolateTails => extrapolate(p[0], s[0], p[1], s[1], u),
            });
        }
        if u >= p[n - 1] {
            return Ok(match self.support_policy {
                SupportPolicy::Clamp => s[n - 1],
                SupportPolicy::LinearExtrapolateTails => {
                    extrapolate(p[n - 2], s[n - 2], p[n - 1], s[n - 1], u)
                }
            });
        }
        let j = p.partition_point(|v| *v <= u) - 1;
        Ok(s[j] + (s[j + 1] - s[j]) * (u - p[j]) / (p[j + 1] - p[j]))
    }
}

fn extrapolate(x0: f64, y0: f64, x1: f64, y1: f64, x: f64) -> f64 {
    if x1 == x0 {
        return y0;
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Column-wise rank transform to `(0,1)`: average ranks divided by `N+1`.
///
/// Ties get the average of the ranks they span, which makes the output
/// deterministic and invariant under strictly increasing transforms.
pub fn pseudo_observations(data: &Matrix) -> Result<Matrix> {
    if data.nrows() < 2 {
        return Err(Error::InvalidInput(format!(
            "pseudo-observations need at least 2 rows, got {}",
            data.nrows()
        )));
    }
    if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("matrix entry {bad}")));
    }
    let n = data.nrows();
    let mut out = Matrix::zeros(n, data.ncols());
    for j in 0..data.ncols() {
        let col = data.column(j);
        let ranks = average_ranks(&col);
        for i in 0..n {
            out[(i, j)] = ranks[i] / (n as f64 + 1.0);
        }
    }
    Ok(out)
}

/// Average ranks (1-based) with ties sharing the mean of their rank span.
pub(crate) fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut k = i;
        while k + 1 < n && values[order[k + 1]] == values[order[i]] {
            k += 1;
        }
        // ranks i+1 ..= k+1 averaged
        let avg = (i + 1 + k + 1) as f64 / 2.0;
        for &idx in &order[i..=k] {
            ranks[idx] = avg;
        }
        i = k + 1;
    }
    ranks
}
