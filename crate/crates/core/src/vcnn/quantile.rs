//! Copula-weighted conditional quantiles.
//!
//! The conditional tau-quantile of the target given an embedding solves the
//! estimating equation with the quantile identifying function
//! `g(y) = tau - 1{y <= q}`, reweighted from conditional to unconditional
//! expectations: each training target gets the weight
//! `c_joint(u_xi, F_Y(y_i)) / c_xi(u_xi)`, the joint vine density over the
//! marginal density of the embedding block. The quantile is the smallest
//! training target whose cumulative normalized weight reaches tau.
//!
//! When the target variable is a leaf of every tree, the ratio collapses to
//! the product of the target-edge pair densities along the cascade, which is
//! what the fast path evaluates.

use crate::error::{Error, Result};
use crate::vine::{
    cascade_outputs, edge_argument_sources, vine_log_pdf, CascadeOuts, CascadePlan, EdgeArgSource,
    TargetChain, VineModel,
};
use crate::paircop::{hfunc, pair_pdf, Direction};

/// Weights with `max < exp(LOG_WEIGHT_FLOOR)` are treated as numerically
/// zero: the point lies outside the copula's effective support.
const LOG_WEIGHT_FLOOR: f64 = -27.6; // ln(1e-12)

/// Grid size for the numeric integration fallback of the embedding-block
/// marginal density.
const MARGIN_GRID: usize = 64;

/// Weight engine for one conditional distribution query.
pub(crate) struct QuantileWeights<'m> {
    joint: &'m VineModel,
    chain: Option<ChainPath<'m>>,
}

/// Fast path: target-edge chain with partner values resolved at the query
/// point.
struct ChainPath<'m> {
    joint: &'m VineModel,
    /// `(tree, edge, partner value at the query point)`, bottom-up; only
    /// non-independence edges are kept.
    steps: Vec<(usize, usize, f64)>,
}

impl<'m> QuantileWeights<'m> {
    /// Prepares the engine at embedding pseudo-observations `u_xi`
    /// (dimension `d - 1` of the joint vine).
    ///
    /// `margin` is the embedding-block vine from a pinned fit; when present
    /// together with a detectable target chain, the fast path is used.
    pub fn at_point(
        joint: &'m VineModel,
        margin: Option<&'m VineModel>,
        u_xi: &[f64],
    ) -> Result<Self> {
        let d = joint.dimension();
        if u_xi.len() != d - 1 {
            return Err(Error::DimensionMismatch { expected: d - 1, got: u_xi.len() });
        }
        if u_xi.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
            return Err(Error::InvalidInput(
                "embedding pseudo-observations must lie strictly inside (0,1)".into(),
            ));
        }

        let chain = TargetChain::detect(joint.structure()).and_then(|chain| {
            let margin_outs: CascadeOuts = if d == 2 {
                Vec::new()
            } else {
                match margin {
                    Some(m) if m.dimension() == d - 1 => match cascade_outputs(m, u_xi) {
                        Ok(outs) => outs,
                        Err(_) => return None,
                    },
                    _ => return None,
                }
            };
            let plan = CascadePlan::new(joint.structure()).ok()?;
            let mut steps = Vec::with_capacity(chain.edges.len());
            for &(tree, edge) in &chain.edges {
                if joint.copula(tree, edge).is_independence() {
                    continue;
                }
                let (_, second) = edge_argument_sources(&plan, tree, edge);
                let partner = match second {
                    EdgeArgSource::Leaf(v) => {
                        if v >= u_xi.len() {
                            return None;
                        }
                        u_xi[v]
                    }
                    EdgeArgSource::Out { tree, edge, first_slot } => {
                        let pair = *margin_outs.get(tree)?.get(edge)?;
                        if first_slot {
                            pair.0
                        } else {
                            pair.1
                        }
                    }
                };
                steps.push((tree, edge, partner));
            }
            Some(ChainPath { joint, steps })
        });

        Ok(Self { joint, chain })
    }

    /// Weights for all training pseudo-targets, normalized to sum to one.
    ///
    /// Errors with [`Error::OutOfSupport`] when every weight underflows the
    /// numeric floor.
    pub fn normalized_weights(&self, u_xi: &[f64], u_y_train: &[f64]) -> Result<Vec<f64>> {
        let logs: Vec<f64> = match &self.chain {
            Some(chain) => u_y_train
                .iter()
                .map(|&uy| chain.log_weight(uy))
                .collect::<Result<Vec<f64>>>()?,
            None => self.generic_log_weights(u_xi, u_y_train)?,
        };
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() || max < LOG_WEIGHT_FLOOR {
            return Err(Error::OutOfSupport);
        }
        let mut weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        Ok(weights)
    }

    /// Generic path: joint vine density over the grid-integrated margin.
    fn generic_log_weights(&self, u_xi: &[f64], u_y_train: &[f64]) -> Result<Vec<f64>> {
        let d = self.joint.dimension();
        let mut point = Vec::with_capacity(d);
        point.extend_from_slice(u_xi);
        point.push(0.5);

        // log c_xi(u_xi) = log integral of the joint density over the target
        // coordinate, by midpoint rule in log space.
        let mut grid_logs = Vec::with_capacity(MARGIN_GRID);
        for g in 0..MARGIN_GRID {
            point[d - 1] = (g as f64 + 0.5) / MARGIN_GRID as f64;
            grid_logs.push(vine_log_pdf(self.joint, &point)?);
        }
        let gmax = grid_logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_margin = if gmax.is_finite() {
            gmax + (grid_logs.iter().map(|l| (l - gmax).exp()).sum::<f64>()
                / MARGIN_GRID as f64)
                .ln()
        } else {
            f64::NEG_INFINITY
        };
        if !log_margin.is_finite() {
            return Err(Error::OutOfSupport);
        }

        u_y_train
            .iter()
            .map(|&uy| {
                point[d - 1] = uy;
                Ok(vine_log_pdf(self.joint, &point)? - log_margin)
            })
            .collect()
    }
}

impl ChainPath<'_> {
    /// Pushes the target pseudo-observation through its edge chain,
    /// accumulating the log pair densities.
    fn log_weight(&self, u_y: f64) -> Result<f64> {
        let mut value = u_y;
        let mut acc = 0.0;
        for &(tree, edge, partner) in &self.steps {
            let spec = self.joint.copula(tree, edge);
            acc += pair_pdf(spec, value, partner)?.max(f64::MIN_POSITIVE).ln();
            value = hfunc(spec, value, partner, Direction::FirstGivenSecond)?;
        }
        Ok(acc)
    }
}

/// Smallest `values` entry whose cumulative normalized weight reaches `tau`.
///
/// This is the weighted estimating-equation quantile; with uniform weights it
/// reduces to the usual empirical quantile.
pub fn weighted_quantile(values: &[f64], weights: &[f64], tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::OutOfUnitInterval(tau));
    }
    if values.len() != weights.len() {
        return Err(Error::DimensionMismatch { expected: values.len(), got: weights.len() });
    }
    if values.is_empty() {
        return Err(Error::InvalidInput("weighted quantile of an empty sample".into()));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::NonFinite("quantile weights must be finite and nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::OutOfSupport);
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut cum = 0.0;
    for &i in &order {
        cum += weights[i] / total;
        if cum >= tau {
            return Ok(values[i]);
        }
    }
    Ok(values[order[values.len() - 1]])
}
