//! Retrospective uncertainty orchestration.
//!
//! Given an already-trained trunk network, the fit couples its last-hidden
//! embeddings with the target through a vine copula, then bootstraps `S`
//! prediction heads from vine samples. Epistemic confidence intervals scale
//! the cross-head standard error by a simultaneous critical value; aleatoric
//! prediction intervals are copula-weighted conditional quantiles of the
//! target given the embedding.

mod epistemic;
mod quantile;
mod report;

pub use epistemic::{simultaneous_band, SimultaneousBand};
pub use quantile::weighted_quantile;
pub use report::IntervalReport;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marginals::{fit_marginal, pseudo_observations, MarginalModel};
use crate::matrix::Matrix;
use crate::net::{train_head, HeadEnsemble, LrSchedule, MlpModel, TrainConfig};
use crate::paircop::FitConfig;
use crate::rng::derive_rng;
use crate::vine::{fit_vine_with_options, sample_vine, VineFitOptions, VineModel};
use quantile::QuantileWeights;

/// Controls for [`fit_vcnn`] and the interval operations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VcnnConfig {
    /// Number of bootstrapped heads.
    pub s: usize,
    /// Target miscoverage; intervals aim at `1 - alpha` coverage.
    pub alpha: f64,
    /// Vine draws per head; defaults to the training-set size.
    pub bootstrap_sample_size: Option<usize>,
    /// Quantile levels evaluated for calibration curves.
    pub tau_grid: Vec<f64>,
    /// Vine truncation level (trees above it are independence).
    pub truncation_level: usize,
    /// Keep the target variable a leaf in every vine tree, enabling the
    /// exact margin for the quantile weights.
    pub pin_target_leaf: bool,
    /// Pair-copula fitting controls.
    pub fit: FitConfig,
    /// Head training hyper-parameters; the seed field is ignored (per-head
    /// seeds derive from `seed`).
    pub head_train: TrainConfig,
    /// Run seed for every stochastic step of the fit.
    pub seed: u64,
}

impl Default for VcnnConfig {
    fn default() -> Self {
        Self {
            s: 30,
            alpha: 0.05,
            bootstrap_sample_size: None,
            tau_grid: (1..20).map(|k| k as f64 / 20.0).collect(),
            truncation_level: 3,
            pin_target_leaf: true,
            fit: FitConfig::default(),
            // Heads are trained to convergence: the annealed step removes
            // optimizer noise from the cross-head dispersion, leaving the
            // bootstrap variability the intervals are meant to measure.
            head_train: TrainConfig {
                epochs: 400,
                learning_rate: 3e-3,
                batch_size: 32,
                seed: 0,
                schedule: LrSchedule::StepDecay { every: 50, factor: 0.5 },
            },
            seed: 0,
        }
    }
}

impl VcnnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.s < 2 {
            return Err(Error::InvalidInput(format!("bootstrap count must be >= 2, got {}", self.s)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::OutOfUnitInterval(self.alpha));
        }
        if self.truncation_level == 0 {
            return Err(Error::InvalidInput("truncation level must be >= 1".into()));
        }
        if self.tau_grid.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
            return Err(Error::InvalidInput("tau grid must lie strictly inside (0,1)".into()));
        }
        if self.tau_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("tau grid must be strictly increasing".into()));
        }
        if let Some(b) = self.bootstrap_sample_size {
            if b < 2 {
                return Err(Error::InvalidInput("bootstrap sample size must be >= 2".into()));
            }
        }
        self.fit.validate()
    }
}

/// The fitted compound: trunk, marginals, vine over (embedding, target),
/// bootstrapped heads.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VcnnModel {
    trunk: MlpModel,
    /// One marginal per embedding coordinate plus the target (last).
    marginals: Vec<MarginalModel>,
    vine: VineModel,
    /// Embedding-block vine from the pinned fit, when available.
    xi_margin: Option<VineModel>,
    heads: HeadEnsemble,
    config: VcnnConfig,
    /// Training targets and their pseudo-observations, aligned by index.
    y_train: Vec<f64>,
    u_y_train: Vec<f64>,
}

impl VcnnModel {
    pub fn trunk(&self) -> &MlpModel {
        &self.trunk
    }

    pub fn vine(&self) -> &VineModel {
        &self.vine
    }

    pub fn xi_margin(&self) -> Option<&VineModel> {
        self.xi_margin.as_ref()
    }

    pub fn heads(&self) -> &HeadEnsemble {
        &self.heads
    }

    pub fn config(&self) -> &VcnnConfig {
        &self.config
    }

    pub fn embedding_dim(&self) -> usize {
        self.trunk.embedding_dim()
    }

    /// Embedding marginals applied coordinate-wise, clamped inside (0,1).
    fn embedding_pseudo(&self, xi: &[f64]) -> Result<Vec<f64>> {
        if xi.len() != self.embedding_dim() {
            return Err(Error::DimensionMismatch { expected: self.embedding_dim(), got: xi.len() });
        }
        Ok(xi
            .iter()
            .zip(&self.marginals[..self.embedding_dim()])
            .map(|(&v, m)| m.cdf(v))
            .collect())
    }
}

/// Fits the uncertainty compound on top of a trained trunk.
pub fn fit_vcnn(
    trunk: MlpModel,
    x_train: &Matrix,
    y_train: &[f64],
    config: VcnnConfig,
) -> Result<VcnnModel> {
    config.validate()?;
    if x_train.nrows() != y_train.len() {
        return Err(Error::DimensionMismatch { expected: x_train.nrows(), got: y_train.len() });
    }
    if x_train.ncols() != trunk.input_dim() {
        return Err(Error::DimensionMismatch { expected: trunk.input_dim(), got: x_train.ncols() });
    }
    let n = x_train.nrows();
    let d = trunk.embedding_dim();

    // Step 1: embeddings of the training inputs.
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(n); d + 1];
    for row in x_train.rows() {
        let xi = trunk.embed(row)?;
        for (j, &v) in xi.iter().enumerate() {
            columns[j].push(v);
        }
    }
    columns[d] = y_train.to_vec();
    let z = Matrix::from_columns(&columns)?;

    // Step 2: marginals, pseudo-observations, vine over (embedding, target).
    let marginals: Vec<MarginalModel> =
        columns.iter().map(|c| fit_marginal(c)).collect::<Result<_>>()?;
    let u = pseudo_observations(&z)?;
    let fit = fit_vine_with_options(
        &u,
        &config.fit,
        &VineFitOptions {
            truncation_level: config.truncation_level,
            pin_last_as_leaf: config.pin_target_leaf,
        },
    )?;

    // Step 3: for each repetition, sample the vine, map the draws back to
    // data scale through the marginal quantiles, and retrain a head.
    let n_boot = config.bootstrap_sample_size.unwrap_or(n);
    let head_seeds: Vec<u64> = {
        use rand::Rng;
        let mut rng = derive_rng(config.seed, "head-seeds");
        (0..config.s).map(|_| rng.random()).collect()
    };
    let heads = (0..config.s)
        .into_par_iter()
        .map(|s| {
            let mut rng = derive_rng(config.seed, &format!("vine-bootstrap-{s}"));
            let draws = sample_vine(&fit.joint, n_boot, &mut rng)?;
            let mut xi_rows: Vec<Vec<f64>> = Vec::with_capacity(n_boot);
            let mut y_star: Vec<f64> = Vec::with_capacity(n_boot);
            for row in draws.rows() {
                let mut xi = Vec::with_capacity(d);
                for (j, &uv) in row.iter().take(d).enumerate() {
                    xi.push(marginals[j].quantile(uv)?);
                }
                xi_rows.push(xi);
                y_star.push(marginals[d].quantile(row[d])?);
            }
            let xi_star = Matrix::from_rows(&xi_rows)?;
            train_head(
                &xi_star,
                &y_star,
                &TrainConfig { seed: head_seeds[s], ..config.head_train.clone() },
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let u_y_train = u.column(d);
    Ok(VcnnModel {
        trunk,
        marginals,
        vine: fit.joint,
        xi_margin: fit.margin,
        heads: HeadEnsemble::new(heads)?,
        config,
        y_train: y_train.to_vec(),
        u_y_train,
    })
}

/// Epistemic confidence intervals at the test points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpistemicIntervals {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Trunk predictions (interval centers).
    pub prediction: Vec<f64>,
    /// Cross-head mean, exposed for diagnostics.
    pub head_mean: Vec<f64>,
    /// Cross-head standard error per point.
    pub se: Vec<f64>,
    /// Simultaneous critical value.
    pub r: f64,
    /// All heads agreed everywhere; intervals have zero width.
    pub degenerate: bool,
}

/// Computes simultaneous confidence intervals `prediction +/- r * SE` from
/// the bootstrapped heads evaluated at the test locations.
pub fn epistemic_interval(
    model: &VcnnModel,
    x_test: &Matrix,
    alpha: f64,
) -> Result<EpistemicIntervals> {
    if x_test.nrows() == 0 {
        return Err(Error::InvalidInput("need at least one test point".into()));
    }
    let embeddings: Vec<Vec<f64>> =
        x_test.rows().map(|r| model.trunk.embed(r)).collect::<Result<_>>()?;
    let preds = model.heads.predict_all(&embeddings)?;
    let band = simultaneous_band(&preds, alpha)?;
    let prediction: Vec<f64> = x_test.rows().map(|r| model.trunk.predict(r)).collect::<Result<_>>()?;
    let lower: Vec<f64> =
        prediction.iter().zip(&band.se).map(|(p, s)| p - band.r * s).collect();
    let upper: Vec<f64> =
        prediction.iter().zip(&band.se).map(|(p, s)| p + band.r * s).collect();
    Ok(EpistemicIntervals {
        lower,
        upper,
        prediction,
        head_mean: band.center,
        se: band.se,
        r: band.r,
        degenerate: band.degenerate,
    })
}

/// Conditional tau-quantile of the target given one embedding.
pub fn conditional_quantile(model: &VcnnModel, xi: &[f64], tau: f64) -> Result<f64> {
    let qs = conditional_quantiles(model, xi, &[tau])?;
    Ok(qs[0])
}

/// Normalized estimating-equation weights on the copula scale: one weight
/// per training pseudo-target, proportional to the joint vine density at
/// `(u_xi, u_y)` over the embedding-block marginal density at `u_xi`.
///
/// `margin` is the embedding-block vine of a pinned fit; without it the
/// marginal density comes from numeric integration.
pub fn conditional_quantile_weights(
    joint: &VineModel,
    margin: Option<&VineModel>,
    u_xi: &[f64],
    u_y_train: &[f64],
) -> Result<Vec<f64>> {
    let engine = QuantileWeights::at_point(joint, margin, u_xi)?;
    engine.normalized_weights(u_xi, u_y_train)
}

/// Conditional quantiles at several levels, sharing one weight computation.
pub fn conditional_quantiles(model: &VcnnModel, xi: &[f64], taus: &[f64]) -> Result<Vec<f64>> {
    let u_xi = model.embedding_pseudo(xi)?;
    let engine = QuantileWeights::at_point(&model.vine, model.xi_margin.as_ref(), &u_xi)?;
    let weights = engine.normalized_weights(&u_xi, &model.u_y_train)?;
    taus.iter().map(|&tau| weighted_quantile(&model.y_train, &weights, tau)).collect()
}

/// Aleatoric prediction intervals at the test points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AleatoricIntervals {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Points whose weights vanished; bounds fall back to the unconditional
    /// quantiles of the training targets.
    pub fallback: Vec<bool>,
}

/// Conditional-quantile prediction intervals at levels `alpha/2` and
/// `1 - alpha/2`.
pub fn aleatoric_interval(
    model: &VcnnModel,
    x_test: &Matrix,
    alpha: f64,
) -> Result<AleatoricIntervals> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::OutOfUnitInterval(alpha));
    }
    let (tau_low, tau_high) = (alpha / 2.0, 1.0 - alpha / 2.0);
    let results: Vec<(f64, f64, bool)> = x_test
        .rows()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|row| -> Result<(f64, f64, bool)> {
            let xi = model.trunk.embed(row)?;
            match conditional_quantiles(model, &xi, &[tau_low, tau_high]) {
                Ok(qs) => Ok((qs[0], qs[1], false)),
                Err(Error::OutOfSupport) => {
                    let ones = vec![1.0; model.y_train.len()];
                    Ok((
                        weighted_quantile(&model.y_train, &ones, tau_low)?,
                        weighted_quantile(&model.y_train, &ones, tau_high)?,
                        true,
                    ))
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    Ok(AleatoricIntervals {
        lower: results.iter().map(|r| r.0).collect(),
        upper: results.iter().map(|r| r.1).collect(),
        fallback: results.iter().map(|r| r.2).collect(),
    })
}

/// Conditional quantiles on the configured tau grid for every test point,
/// row-major `n x taus`.
pub fn conditional_quantile_grid(
    model: &VcnnModel,
    x_test: &Matrix,
    taus: &[f64],
) -> Result<Vec<Vec<f64>>> {
    x_test
        .rows()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|row| {
            let xi = model.trunk.embed(row)?;
            conditional_quantiles(model, &xi, taus)
        })
        .collect()
}

/// Per-point envelope of the epistemic and aleatoric intervals:
/// `L = min` of the lower bounds, `U = max` of the upper bounds.
pub fn combined_envelope(
    epistemic: &EpistemicIntervals,
    aleatoric: &AleatoricIntervals,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if epistemic.lower.len() != aleatoric.lower.len() {
        return Err(Error::DimensionMismatch {
            expected: epistemic.lower.len(),
            got: aleatoric.lower.len(),
        });
    }
    let lower = epistemic
        .lower
        .iter()
        .zip(&aleatoric.lower)
        .map(|(a, b)| a.min(*b))
        .collect();
    let upper = epistemic
        .upper
        .iter()
        .zip(&aleatoric.upper)
        .map(|(a, b)| a.max(*b))
        .collect();
    Ok((lower, upper))
}

/// Runs both interval computations and assembles the full report.
pub fn compute_intervals(model: &VcnnModel, x_test: &Matrix) -> Result<IntervalReport> {
    let alpha = model.config.alpha;
    let epistemic = epistemic_interval(model, x_test, alpha)?;
    let aleatoric = aleatoric_interval(model, x_test, alpha)?;
    let (envelope_lower, envelope_upper) = combined_envelope(&epistemic, &aleatoric)?;
    Ok(IntervalReport {
        features: x_test.clone(),
        y_hat: epistemic.prediction.clone(),
        epistemic_lower: epistemic.lower,
        epistemic_upper: epistemic.upper,
        aleatoric_lower: aleatoric.lower,
        aleatoric_upper: aleatoric.upper,
        envelope_lower,
        envelope_upper,
        r: epistemic.r,
        se: epistemic.se,
        head_mean: epistemic.head_mean,
        degenerate_ensemble: epistemic.degenerate,
        aleatoric_fallback: aleatoric.fallback,
        alpha,
        rng: crate::rng::RNG_ID.to_string(),
        config: model.config.clone(),
    })
}
