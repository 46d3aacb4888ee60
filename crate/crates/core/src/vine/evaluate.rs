//! Joint density, Rosenblatt transforms and simulation for fitted vines.
//!
//! Every edge consumes two conditional pseudo-observations produced by its
//! parents (or raw coordinates in the first tree) and emits two new ones via
//! its h-functions. The wiring is fixed by the structure, so it is resolved
//! once into a [`CascadePlan`] and replayed per evaluation point.

use rand::Rng;

use super::{Slot, VineModel, VineStructure};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::paircop::{hfunc, hinv, pair_pdf, Direction};

/// Where an edge argument comes from.
#[derive(Debug, Clone, Copy)]
enum ArgSource {
    /// Raw coordinate of the evaluation point.
    Leaf(usize),
    /// Output of a previous-tree edge.
    Out { tree: usize, edge: usize, slot: Slot },
}

#[derive(Debug, Clone)]
struct EdgePlan {
    first: ArgSource,
    second: ArgSource,
}

/// Resolved argument wiring for every edge of a structure.
pub(crate) struct CascadePlan {
    plans: Vec<Vec<EdgePlan>>,
}

impl CascadePlan {
    pub(crate) fn new(structure: &VineStructure) -> Result<Self> {
        let mut plans: Vec<Vec<EdgePlan>> = Vec::with_capacity(structure.trees().len());
        for (t, tree) in structure.trees().iter().enumerate() {
            let mut tree_plans = Vec::with_capacity(tree.len());
            for edge in tree {
                let (j, k) = edge.conditioned;
                let plan = if t == 0 {
                    EdgePlan { first: ArgSource::Leaf(j), second: ArgSource::Leaf(k) }
                } else {
                    let (a, b) = edge.parents.ok_or_else(|| {
                        Error::InvalidStructure("edge above tree 1 lacks parents".into())
                    })?;
                    let slot_a = structure.trees()[t - 1][a].slot_of(j).ok_or_else(|| {
                        Error::InvalidStructure(format!(
                            "edge ({j},{k}) is not wired to its first parent"
                        ))
                    })?;
                    let slot_b = structure.trees()[t - 1][b].slot_of(k).ok_or_else(|| {
                        Error::InvalidStructure(format!(
                            "edge ({j},{k}) is not wired to its second parent"
                        ))
                    })?;
                    EdgePlan {
                        first: ArgSource::Out { tree: t - 1, edge: a, slot: slot_a },
                        second: ArgSource::Out { tree: t - 1, edge: b, slot: slot_b },
                    }
                };
                tree_plans.push(plan);
            }
            plans.push(tree_plans);
        }
        Ok(Self { plans })
    }
}

/// Per-edge h-function outputs for one evaluation point.
pub(crate) type CascadeOuts = Vec<Vec<(f64, f64)>>;

fn resolve(source: ArgSource, u: &[f64], outs: &CascadeOuts) -> f64 {
    match source {
        ArgSource::Leaf(v) => u[v],
        ArgSource::Out { tree, edge, slot } => match slot {
            Slot::First => outs[tree][edge].0,
            Slot::Second => outs[tree][edge].1,
        },
    }
}

fn check_point(model: &VineModel, u: &[f64]) -> Result<()> {
    if u.len() != model.dimension() {
        return Err(Error::DimensionMismatch { expected: model.dimension(), got: u.len() });
    }
    for &x in u {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::OutOfUnitInterval(x));
        }
    }
    Ok(())
}

/// Runs the full h-function cascade, returning the log density and every
/// edge's pair of conditional outputs.
fn full_cascade(model: &VineModel, plan: &CascadePlan, u: &[f64]) -> Result<(f64, CascadeOuts)> {
    let mut outs: CascadeOuts = Vec::with_capacity(plan.plans.len());
    let mut log_density = 0.0;
    for (t, tree_plans) in plan.plans.iter().enumerate() {
        let mut tree_outs = Vec::with_capacity(tree_plans.len());
        for (e, edge_plan) in tree_plans.iter().enumerate() {
            let a = resolve(edge_plan.first, u, &outs);
            let b = resolve(edge_plan.second, u, &outs);
            let spec = model.copula(t, e);
            if spec.is_independence() {
                tree_outs.push((a, b));
                continue;
            }
            log_density += pair_pdf(spec, a, b)?.max(f64::MIN_POSITIVE).ln();
            tree_outs.push((
                hfunc(spec, a, b, Direction::FirstGivenSecond)?,
                hfunc(spec, b, a, Direction::SecondGivenFirst)?,
            ));
        }
        outs.push(tree_outs);
    }
    Ok((log_density, outs))
}

/// Every edge's conditional outputs at one point, exposed for the quantile
/// weight machinery.
pub(crate) fn cascade_outputs(model: &VineModel, u: &[f64]) -> Result<CascadeOuts> {
    check_point(model, u)?;
    let plan = CascadePlan::new(model.structure())?;
    let (_, outs) = full_cascade(model, &plan, u)?;
    Ok(outs)
}

/// Argument sources of one edge, resolved against a cascade output table.
pub(crate) fn edge_argument_sources(
    plan: &CascadePlan,
    tree: usize,
    edge: usize,
) -> (EdgeArgSource, EdgeArgSource) {
    let p = &plan.plans[tree][edge];
    (EdgeArgSource::from(p.first), EdgeArgSource::from(p.second))
}

/// Crate-facing view of [`ArgSource`].
#[derive(Debug, Clone, Copy)]
pub(crate) enum EdgeArgSource {
    Leaf(usize),
    Out { tree: usize, edge: usize, first_slot: bool },
}

impl From<ArgSource> for EdgeArgSource {
    fn from(a: ArgSource) -> Self {
        match a {
            ArgSource::Leaf(v) => EdgeArgSource::Leaf(v),
            ArgSource::Out { tree, edge, slot } => {
                EdgeArgSource::Out { tree, edge, first_slot: slot == Slot::First }
            }
        }
    }
}

/// Joint copula density: the product over all edges of the pair densities at
/// h-transformed arguments.
pub fn vine_pdf(model: &VineModel, u: &[f64]) -> Result<f64> {
    Ok(vine_log_pdf(model, u)?.exp())
}

/// Log of [`vine_pdf`]; preferred inside products over many points.
pub fn vine_log_pdf(model: &VineModel, u: &[f64]) -> Result<f64> {
    check_point(model, u)?;
    let plan = CascadePlan::new(model.structure())?;
    let (log_density, _) = full_cascade(model, &plan, u)?;
    Ok(log_density)
}

/// Sampling order and lookup tables derived from the structure alone.
pub(crate) struct SamplingPlan {
    /// Variable order `v_1 .. v_d`.
    order: Vec<usize>,
    /// For order position `p >= 1`: the edge whose first-slot output is the
    /// conditional CDF of `order[p]` given `order[0..p]`.
    read: Vec<(usize, usize)>,
    /// For order position `p >= 1`: the top-down chain of `(tree, edge,
    /// slot-of-variable)` used to invert the conditional CDF.
    chains: Vec<Vec<(usize, usize, Slot)>>,
}

impl SamplingPlan {
    pub(crate) fn new(structure: &VineStructure) -> Result<Self> {
        let d = structure.dimension();
        let trees = structure.trees();
        let mut order = vec![usize::MAX; d];
        let mut read = vec![(usize::MAX, usize::MAX); d - 1];

        // Descend from the single top edge: at each tree pick the first
        // conditioned variable and continue into the parent that excludes it.
        let mut cur = 0usize;
        for t in (0..d - 1).rev() {
            let edge = &trees[t][cur];
            order[t + 1] = edge.conditioned.0;
            read[t] = (t, cur);
            if t > 0 {
                cur = edge.parents.expect("validated structure").1;
            } else {
                order[0] = edge.conditioned.1;
            }
        }

        // Inversion chains: from the reading edge walk down the side of the
        // variable being recovered.
        let mut chains = Vec::with_capacity(d - 1);
        for p in 1..d {
            let v = order[p];
            let mut chain = Vec::with_capacity(p);
            let (mut t, mut idx) = read[p - 1];
            loop {
                let edge = &trees[t][idx];
                let slot = edge.slot_of(v).ok_or_else(|| {
                    Error::InvalidStructure(format!(
                        "variable {v} is not produced along its inversion chain"
                    ))
                })?;
                chain.push((t, idx, slot));
                if t == 0 {
                    break;
                }
                let parents = edge.parents.expect("validated structure");
                idx = match slot {
                    Slot::First => parents.0,
                    Slot::Second => parents.1,
                };
                t -= 1;
            }
            chains.push(chain);
        }
        Ok(Self { order, read, chains })
    }
}

/// Maps a model-distributed point to independent uniforms through the nested
/// conditional CDFs. Output is indexed by variable, so for an
/// all-independence vine the map is the identity.
pub fn rosenblatt(model: &VineModel, u: &[f64]) -> Result<Vec<f64>> {
    check_point(model, u)?;
    let plan = CascadePlan::new(model.structure())?;
    let sampling = SamplingPlan::new(model.structure())?;
    let (_, outs) = full_cascade(model, &plan, u)?;
    let mut z = vec![0.0; u.len()];
    z[sampling.order[0]] = u[sampling.order[0]];
    for p in 1..u.len() {
        let (t, e) = sampling.read[p - 1];
        z[sampling.order[p]] = outs[t][e].0;
    }
    Ok(z)
}

/// Exact inverse of [`rosenblatt`]: turns independent uniforms into a draw
/// from the vine.
pub fn inverse_rosenblatt(model: &VineModel, w: &[f64]) -> Result<Vec<f64>> {
    check_point(model, w)?;
    let plan = CascadePlan::new(model.structure())?;
    let sampling = SamplingPlan::new(model.structure())?;
    inverse_rosenblatt_with(model, &plan, &sampling, w)
}

pub(crate) fn inverse_rosenblatt_with(
    model: &VineModel,
    plan: &CascadePlan,
    sampling: &SamplingPlan,
    w: &[f64],
) -> Result<Vec<f64>> {
    let d = model.dimension();
    let trees = model.structure().trees();
    let mut u = vec![f64::NAN; d];
    let mut outs: Vec<Vec<Option<(f64, f64)>>> =
        trees.iter().map(|t| vec![None; t.len()]).collect();
    let mut assigned: u128 = 0;

    let first = sampling.order[0];
    u[first] = w[first];
    assigned |= 1u128 << first;

    for p in 1..d {
        let v = sampling.order[p];
        let mut t_val = w[v];
        for &(t, idx, slot) in &sampling.chains[p - 1] {
            let edge_plan = &plan.plans[t][idx];
            let partner = match slot {
                Slot::First => resolve_partial(edge_plan.second, &u, &outs)?,
                Slot::Second => resolve_partial(edge_plan.first, &u, &outs)?,
            };
            let dir = match slot {
                Slot::First => Direction::FirstGivenSecond,
                Slot::Second => Direction::SecondGivenFirst,
            };
            t_val = hinv(model.copula(t, idx), t_val, partner, dir)?;
        }
        u[v] = t_val;
        assigned |= 1u128 << v;

        // Fill in every edge whose constraint set is now fully assigned.
        for (t, tree) in trees.iter().enumerate() {
            for (idx, edge) in tree.iter().enumerate() {
                if outs[t][idx].is_some() || edge.constraint_mask() & !assigned != 0 {
                    continue;
                }
                let edge_plan = &plan.plans[t][idx];
                let a = resolve_partial(edge_plan.first, &u, &outs)?;
                let b = resolve_partial(edge_plan.second, &u, &outs)?;
                let spec = model.copula(t, idx);
                outs[t][idx] = Some(if spec.is_independence() {
                    (a, b)
                } else {
                    (
                        hfunc(spec, a, b, Direction::FirstGivenSecond)?,
                        hfunc(spec, b, a, Direction::SecondGivenFirst)?,
                    )
                });
            }
        }
    }
    Ok(u)
}

fn resolve_partial(
    source: ArgSource,
    u: &[f64],
    outs: &[Vec<Option<(f64, f64)>>],
) -> Result<f64> {
    let v = match source {
        ArgSource::Leaf(v) => u[v],
        ArgSource::Out { tree, edge, slot } => {
            let pair = outs[tree][edge].ok_or_else(|| {
                Error::InvalidStructure("cascade value required before it was computed".into())
            })?;
            match slot {
                Slot::First => pair.0,
                Slot::Second => pair.1,
            }
        }
    };
    if v.is_nan() {
        return Err(Error::InvalidStructure("cascade consumed an unassigned coordinate".into()));
    }
    Ok(v)
}

/// Draws `n` observations by pushing seeded uniform noise through the
/// inverse Rosenblatt transform.
pub fn sample_vine<R: Rng + ?Sized>(model: &VineModel, n: usize, rng: &mut R) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::InvalidInput("sample count must be >= 1".into()));
    }
    let d = model.dimension();
    let plan = CascadePlan::new(model.structure())?;
    let sampling = SamplingPlan::new(model.structure())?;
    let mut out = Matrix::zeros(n, d);
    for i in 0..n {
        let w: Vec<f64> = (0..d).map(|_| unit_open(rng)).collect();
        let u = inverse_rosenblatt_with(model, &plan, &sampling, &w)?;
        for (j, &v) in u.iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    Ok(out)
}

fn unit_open<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let x: f64 = rng.random();
        if x > 0.0 && x < 1.0 {
            return x;
        }
    }
}

/// Conditional pseudo-observation columns of the target edge chain, used by
/// the quantile weights: for a vine whose last variable is a leaf in every
/// tree, the weight of a point factorizes over the target edges alone.
pub(crate) struct TargetChain {
    /// `(tree, edge index)` of the target edge per tree, bottom-up.
    pub edges: Vec<(usize, usize)>,
}

impl TargetChain {
    /// Builds the chain when the last variable is a leaf of every tree and
    /// never conditions other edges; `None` otherwise.
    pub(crate) fn detect(structure: &VineStructure) -> Option<Self> {
        let target = structure.dimension() - 1;
        let mut edges = Vec::with_capacity(structure.trees().len());
        for (t, tree) in structure.trees().iter().enumerate() {
            let mut found = None;
            for (idx, edge) in tree.iter().enumerate() {
                if edge.conditioning.contains(&target) {
                    return None;
                }
                if edge.conditioned.0 == target {
                    if found.is_some() {
                        return None;
                    }
                    found = Some(idx);
                } else if edge.conditioned.1 == target {
                    // The cascade below always keeps the target in the first
                    // slot; reject other layouts.
                    return None;
                }
            }
            edges.push((t, found?));
        }
        Some(Self { edges })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marginals::pseudo_observations;
    use crate::paircop::norm::qnorm;
    use crate::paircop::{kendall_tau, FitConfig, PairCopulaSpec};
    use crate::rng::derive_rng;
    use crate::vine::{fit_vine, VineEdge, VineStructure};
    use rand::Rng;

    fn parametric_four_dim_vine() -> VineModel {
        // Hand-built D-vine 0-1-2-3 with mixed families.
        let structure = VineStructure::new(
            4,
            vec![
                vec![
                    VineEdge { conditioned: (0, 1), conditioning: vec![], parents: None },
                    VineEdge { conditioned: (1, 2), conditioning: vec![], parents: None },
                    VineEdge { conditioned: (2, 3), conditioning: vec![], parents: None },
                ],
                vec![
                    VineEdge { conditioned: (0, 2), conditioning: vec![1], parents: Some((0, 1)) },
                    VineEdge { conditioned: (1, 3), conditioning: vec![2], parents: Some((1, 2)) },
                ],
                vec![VineEdge {
                    conditioned: (0, 3),
                    conditioning: vec![1, 2],
                    parents: Some((0, 1)),
                }],
            ],
        )
        .unwrap();
        let copulas = vec![
            vec![
                PairCopulaSpec::gaussian(0.6).unwrap(),
                PairCopulaSpec::clayton(2.0, crate::paircop::Rotation::R0).unwrap(),
                PairCopulaSpec::gumbel(1.8, crate::paircop::Rotation::R0).unwrap(),
            ],
            vec![PairCopulaSpec::frank(3.0).unwrap(), PairCopulaSpec::gaussian(-0.4).unwrap()],
            vec![PairCopulaSpec::gaussian(0.2).unwrap()],
        ];
        VineModel::new(structure, copulas, 3).unwrap()
    }

    fn all_independence_vine(d: usize) -> VineModel {
        // D-vine path structure with independence everywhere.
        let mut trees = Vec::new();
        let mut prev: Vec<VineEdge> = (0..d - 1)
            .map(|i| VineEdge { conditioned: (i, i + 1), conditioning: vec![], parents: None })
            .collect();
        trees.push(prev.clone());
        for t in 1..d - 1 {
            let mut tree = Vec::new();
            for i in 0..d - 1 - t {
                tree.push(VineEdge {
                    conditioned: (i, i + t + 1),
                    conditioning: (i + 1..=i + t).collect(),
                    parents: Some((i, i + 1)),
                });
            }
            prev = tree.clone();
            trees.push(tree);
        }
        let _ = prev;
        let structure = VineStructure::new(d, trees).unwrap();
        let copulas = structure
            .trees()
            .iter()
            .map(|t| t.iter().map(|_| PairCopulaSpec::independence()).collect())
            .collect();
        VineModel::new(structure, copulas, 1).unwrap()
    }

    #[test]
    fn independence_vine_density_is_one_and_maps_are_identity() {
        let model = all_independence_vine(4);
        let u = [0.3, 0.7, 0.5, 0.9];
        assert!((vine_pdf(&model, &u).unwrap() - 1.0).abs() < 1e-12);
        let z = rosenblatt(&model, &u).unwrap();
        assert_eq!(z, u.to_vec());
        let back = inverse_rosenblatt(&model, &u).unwrap();
        assert_eq!(back, u.to_vec());
    }

    #[test]
    fn two_dim_vine_pdf_equals_pair_pdf() {
        let spec = PairCopulaSpec::gaussian(0.55).unwrap();
        let structure = VineStructure::new(
            2,
            vec![vec![VineEdge { conditioned: (0, 1), conditioning: vec![], parents: None }]],
        )
        .unwrap();
        let model = VineModel::new(structure, vec![vec![spec.clone()]], 1).unwrap();
        for &(u, v) in &[(0.2, 0.9), (0.5, 0.5), (0.85, 0.15)] {
            let a = vine_pdf(&model, &[u, v]).unwrap();
            let b = pair_pdf(&spec, u, v).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rosenblatt_round_trip_parametric_vine() {
        let model = parametric_four_dim_vine();
        let mut rng = derive_rng(7, "rosenblatt-rt");
        for _ in 0..100 {
            let u: Vec<f64> = (0..4).map(|_| 0.02 + 0.96 * rng.random::<f64>()).collect();
            let z = rosenblatt(&model, &u).unwrap();
            let back = inverse_rosenblatt(&model, &z).unwrap();
            for (a, b) in u.iter().zip(&back) {
                assert!((a - b).abs() < 1e-6, "roundtrip {a} -> {b}");
            }
        }
    }

    #[test]
    fn rosenblatt_output_is_uniform_and_independent() {
        // Push model samples through the forward transform; the images must
        // be de-correlated uniforms.
        let model = parametric_four_dim_vine();
        let samples = sample_vine(&model, 3000, &mut derive_rng(7, "rosenblatt-unif")).unwrap();
        let mut zs = Matrix::zeros(samples.nrows(), 4);
        for i in 0..samples.nrows() {
            let z = rosenblatt(&model, samples.row(i)).unwrap();
            for (j, &v) in z.iter().enumerate() {
                zs[(i, j)] = v;
            }
        }
        for a in 0..4 {
            for b in a + 1..4 {
                let tau = kendall_tau(&zs.column(a), &zs.column(b)).unwrap();
                assert!(tau.abs() < 0.05, "tau({a},{b}) = {tau}");
            }
        }
    }

    #[test]
    fn simulation_self_consistency_pairwise_taus() {
        let model = parametric_four_dim_vine();
        let a = sample_vine(&model, 5000, &mut derive_rng(7, "sim-a")).unwrap();
        let b = sample_vine(&model, 5000, &mut derive_rng(97, "sim-b")).unwrap();
        for i in 0..4 {
            for j in i + 1..4 {
                let ta = kendall_tau(&a.column(i), &a.column(j)).unwrap();
                let tb = kendall_tau(&b.column(i), &b.column(j)).unwrap();
                assert!((ta - tb).abs() < 0.05, "tau({i},{j}): {ta} vs {tb}");
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let model = parametric_four_dim_vine();
        let a = sample_vine(&model, 50, &mut derive_rng(1, "sim-det")).unwrap();
        let b = sample_vine(&model, 50, &mut derive_rng(1, "sim-det")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn refit_on_own_samples_reproduces_first_tree_taus() {
        let model = parametric_four_dim_vine();
        let samples = sample_vine(&model, 5000, &mut derive_rng(7, "refit")).unwrap();
        let refit = fit_vine(&samples, &FitConfig::parametric(), usize::MAX).unwrap();
        // First-tree taus of fresh samples from both models agree.
        let res_a = sample_vine(&model, 5000, &mut derive_rng(17, "refit-a")).unwrap();
        let res_b = sample_vine(&refit, 5000, &mut derive_rng(17, "refit-b")).unwrap();
        for i in 0..4 {
            for j in i + 1..4 {
                let ta = kendall_tau(&res_a.column(i), &res_a.column(j)).unwrap();
                let tb = kendall_tau(&res_b.column(i), &res_b.column(j)).unwrap();
                assert!((ta - tb).abs() < 0.05, "tau({i},{j}): {ta} vs {tb}");
            }
        }
    }

    /// Closed-form trivariate Gaussian copula density.
    fn gaussian_copula_3d_pdf(corr: [[f64; 3]; 3], u: &[f64]) -> f64 {
        let x: Vec<f64> = u.iter().map(|&p| qnorm(p)).collect();
        // Inverse and determinant of the 3x3 correlation matrix.
        let m = corr;
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        let mut inv = [[0.0; 3]; 3];
        inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
        inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
        inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
        inv[1][0] = inv[0][1];
        inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
        inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
        inv[2][0] = inv[0][2];
        inv[2][1] = inv[1][2];
        inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
        let mut quad = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let iden = if i == j { 1.0 } else { 0.0 };
                quad += x[i] * (inv[i][j] - iden) * x[j];
            }
        }
        (-0.5 * quad).exp() / det.sqrt()
    }

    #[test]
    fn fitted_vine_matches_trivariate_gaussian_density() {
        // Correlated trivariate normal data; a Gaussian-family vine with
        // tau-inverted parameters reproduces the closed-form copula density.
        let corr = [[1.0, 0.5, 0.3], [0.5, 1.0, 0.6], [0.3, 0.6, 1.0]];
        let chol = [
            [1.0, 0.0, 0.0],
            [0.5, 0.75f64.sqrt(), 0.0],
            [0.3, (0.6 - 0.15) / 0.75f64.sqrt(), 0.0],
        ];
        let l22 = (1.0 - chol[2][0] * chol[2][0] - chol[2][1] * chol[2][1]).sqrt();
        let mut rng = derive_rng(29, "vine-gauss3");
        let normal = rand_distr::Normal::new(0.0, 1.0).unwrap();
        let n = 6000;
        let mut cols = vec![Vec::with_capacity(n); 3];
        for _ in 0..n {
            let z: Vec<f64> = (0..3).map(|_| rng.sample(normal)).collect();
            cols[0].push(z[0]);
            cols[1].push(chol[1][0] * z[0] + chol[1][1] * z[1]);
            cols[2].push(chol[2][0] * z[0] + chol[2][1] * z[1] + l22 * z[2]);
        }
        let u = pseudo_observations(&Matrix::from_columns(&cols).unwrap()).unwrap();
        let model = fit_vine(
            &u,
            &FitConfig {
                family_set: vec![crate::paircop::Family::Gaussian],
                ..FitConfig::default()
            },
            usize::MAX,
        )
        .unwrap();
        let mut rng = derive_rng(31, "vine-gauss3-pts");
        for _ in 0..20 {
            let pt: Vec<f64> = (0..3).map(|_| 0.15 + 0.7 * rng.random::<f64>()).collect();
            let fitted = vine_pdf(&model, &pt).unwrap();
            let truth = gaussian_copula_3d_pdf(corr, &pt);
            let rel = (fitted - truth).abs() / truth;
            assert!(rel < 0.10, "relative error {rel} at {pt:?}: {fitted} vs {truth}");
        }
    }

    #[test]
    fn truncation_never_changes_density_when_higher_trees_are_independent() {
        // Same structure and copulas, declared truncation 1 vs 3, with
        // independence above tree 1 in both.
        let structure = all_independence_vine(4).structure().clone();
        let gauss = PairCopulaSpec::gaussian(0.5).unwrap();
        let indep = PairCopulaSpec::independence();
        let copulas = vec![
            vec![gauss.clone(), gauss.clone(), gauss.clone()],
            vec![indep.clone(), indep.clone()],
            vec![indep.clone()],
        ];
        let truncated = VineModel::new(structure.clone(), copulas.clone(), 1).unwrap();
        let full = VineModel::new(structure, copulas, 3).unwrap();
        let u = [0.3, 0.8, 0.25, 0.6];
        let a = vine_log_pdf(&truncated, &u).unwrap();
        let b = vine_log_pdf(&full, &u).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn boundary_points_are_rejected() {
        let model = all_independence_vine(3);
        assert!(vine_pdf(&model, &[0.0, 0.5, 0.5]).is_err());
        assert!(rosenblatt(&model, &[0.5, 1.0, 0.5]).is_err());
        assert!(vine_pdf(&model, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn target_chain_detection() {
        // Pinned-style structure: variable 2 is a leaf everywhere.
        let structure = VineStructure::new(
            3,
            vec![
                vec![
                    VineEdge { conditioned: (0, 1), conditioning: vec![], parents: None },
                    VineEdge { conditioned: (2, 0), conditioning: vec![], parents: None },
                ],
                vec![VineEdge { conditioned: (2, 1), conditioning: vec![0], parents: Some((1, 0)) }],
            ],
        )
        .unwrap();
        let chain = TargetChain::detect(&structure).unwrap();
        assert_eq!(chain.edges, vec![(0, 1), (1, 0)]);

        let not_pinned = all_independence_vine(3);
        assert!(TargetChain::detect(not_pinned.structure()).is_none());
    }
}
