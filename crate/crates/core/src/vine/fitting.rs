//! Sequential per-tree vine fitting (greedy structure + pair-copula fits).
//!
//! Each tree is selected as a maximum spanning tree under |tau| weights of
//! the current conditional pseudo-observations, its edge copulas are fitted,
//! and the h-transformed columns feed the next tree (the simplifying
//! assumption: conditional copulas do not depend on conditioning values).
//! Trees above the truncation level take a deterministic admissible spanning
//! tree and independence copulas.

use super::select::{lexicographic_spanning_tree, maximum_spanning_tree, Candidate};
use super::{VineEdge, VineModel, VineStructure};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::paircop::{fit_pair, hfunc, kendall_tau, Direction, FitConfig, PairCopulaSpec};

/// Options for [`fit_vine_with_options`].
#[derive(Debug, Clone)]
pub struct VineFitOptions {
    /// Trees beyond this level carry independence copulas. Values above
    /// `d - 1` mean no truncation.
    pub truncation_level: usize,
    /// Keep the last variable a leaf in every tree. The sub-vine on the
    /// remaining variables is then exactly the last variable's margin and is
    /// returned alongside the joint model.
    pub pin_last_as_leaf: bool,
}

impl Default for VineFitOptions {
    fn default() -> Self {
        Self { truncation_level: 3, pin_last_as_leaf: false }
    }
}

/// Result of a vine fit: the joint model plus, for pinned fits, the margin
/// vine over all variables except the last.
#[derive(Debug, Clone)]
pub struct PinnedVineFit {
    pub joint: VineModel,
    /// Vine over the first `d-1` variables; `None` for unpinned fits or when
    /// only one non-target variable exists.
    pub margin: Option<VineModel>,
}

/// Fits a vine copula on pseudo-observations.
pub fn fit_vine(u: &Matrix, config: &FitConfig, truncation_level: usize) -> Result<VineModel> {
    let fitted = dissmann(u, config, truncation_level)?;
    fitted.into_model(truncation_level)
}

/// Fits a vine, optionally pinning the last column as a leaf of every tree.
pub fn fit_vine_with_options(
    u: &Matrix,
    config: &FitConfig,
    options: &VineFitOptions,
) -> Result<PinnedVineFit> {
    if options.pin_last_as_leaf {
        fit_pinned(u, config, options.truncation_level)
    } else {
        Ok(PinnedVineFit { joint: fit_vine(u, config, options.truncation_level)?, margin: None })
    }
}

/// One fitted edge with the conditional pseudo-observation columns it
/// produces for the next tree.
pub(crate) struct FittedEdge {
    edge: VineEdge,
    spec: PairCopulaSpec,
    constraint: u128,
    /// val(conditioned.0 | rest of constraint set), one entry per data row.
    out_first: Vec<f64>,
    /// val(conditioned.1 | rest of constraint set).
    out_second: Vec<f64>,
}

impl FittedEdge {
    fn out_for(&self, var: usize) -> Option<&Vec<f64>> {
        if self.edge.conditioned.0 == var {
            Some(&self.out_first)
        } else if self.edge.conditioned.1 == var {
            Some(&self.out_second)
        } else {
            None
        }
    }
}

pub(crate) struct FittedTrees {
    dimension: usize,
    trees: Vec<Vec<FittedEdge>>,
}

impl FittedTrees {
    pub(crate) fn into_structure(self) -> VineStructure {
        VineStructure::new_unchecked(
            self.dimension,
            self.trees
                .into_iter()
                .map(|t| t.into_iter().map(|e| e.edge).collect())
                .collect(),
        )
    }

    fn into_parts(self) -> (VineStructure, Vec<Vec<PairCopulaSpec>>) {
        let dimension = self.dimension;
        let mut edges = Vec::with_capacity(self.trees.len());
        let mut specs = Vec::with_capacity(self.trees.len());
        for tree in self.trees {
            let mut e = Vec::with_capacity(tree.len());
            let mut s = Vec::with_capacity(tree.len());
            for fe in tree {
                e.push(fe.edge);
                s.push(fe.spec);
            }
            edges.push(e);
            specs.push(s);
        }
        (VineStructure::new_unchecked(dimension, edges), specs)
    }

    fn into_model(self, truncation_level: usize) -> Result<VineModel> {
        let d = self.dimension;
        let (structure, specs) = self.into_parts();
        VineModel::new(structure, specs, truncation_level.clamp(1, d - 1))
    }
}

fn validate_input(u: &Matrix) -> Result<()> {
    if u.ncols() < 2 {
        return Err(Error::InvalidInput(format!(
            "vine fitting needs at least 2 columns, got {}",
            u.ncols()
        )));
    }
    if u.ncols() > super::MAX_DIMENSION {
        return Err(Error::InvalidInput(format!(
            "vine dimension {} exceeds the supported maximum {}",
            u.ncols(),
            super::MAX_DIMENSION
        )));
    }
    if u.nrows() < 20 {
        return Err(Error::InvalidInput(format!(
            "vine fitting needs at least 20 rows, got {}",
            u.nrows()
        )));
    }
    if u.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
        return Err(Error::InvalidInput(
            "vine fitting expects pseudo-observations strictly inside (0,1)".into(),
        ));
    }
    Ok(())
}

/// Fits one edge copula. Exactly comonotone columns (tau = +/-1, common when
/// network embeddings of a low-dimensional input are co-ranked) cannot be
/// fit by tau inversion; they collapse to a Gaussian at the parameter cap,
/// which encodes the near-deterministic dependence and keeps the cascade
/// finite.
fn fit_edge(col_a: &[f64], col_b: &[f64], config: &FitConfig) -> Result<PairCopulaSpec> {
    match fit_pair(col_a, col_b, config) {
        Err(Error::DegenerateDependence) => {
            let sign = kendall_tau(col_a, col_b)?.signum();
            PairCopulaSpec::gaussian(sign * crate::paircop::fit::MAX_RHO)
        }
        other => other,
    }
}

/// Applies the fitted copula to produce both conditional columns.
fn transform_columns(
    spec: &PairCopulaSpec,
    first: &[f64],
    second: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if spec.is_independence() {
        return Ok((first.to_vec(), second.to_vec()));
    }
    let mut out_first = Vec::with_capacity(first.len());
    let mut out_second = Vec::with_capacity(first.len());
    for (&a, &b) in first.iter().zip(second) {
        out_first.push(hfunc(spec, a, b, Direction::FirstGivenSecond)?);
        out_second.push(hfunc(spec, b, a, Direction::SecondGivenFirst)?);
    }
    Ok((out_first, out_second))
}

/// Variable of `edge` (by conditioned pair) not present in `other_mask`, if
/// exactly one side qualifies.
fn fresh_variable(edge: &VineEdge, other_mask: u128) -> Option<usize> {
    let (j, k) = edge.conditioned;
    let j_out = other_mask & (1u128 << j) == 0;
    let k_out = other_mask & (1u128 << k) == 0;
    match (j_out, k_out) {
        (true, false) => Some(j),
        (false, true) => Some(k),
        _ => None,
    }
}

fn mask_to_sorted(mask: u128) -> Vec<usize> {
    (0..super::MAX_DIMENSION).filter(|&v| mask & (1u128 << v) != 0).collect()
}

/// The greedy cascade over all trees.
pub(crate) fn dissmann(u: &Matrix, config: &FitConfig, truncation_level: usize) -> Result<FittedTrees> {
    validate_input(u)?;
    config.validate()?;
    let d = u.ncols();
    let columns: Vec<Vec<f64>> = (0..d).map(|j| u.column(j)).collect();

    let mut trees: Vec<Vec<FittedEdge>> = Vec::with_capacity(d - 1);

    // Tree 1: complete graph on the variables.
    {
        let mut candidates: Vec<Candidate> = Vec::with_capacity(d * (d - 1) / 2);
        for a in 0..d {
            for b in a + 1..d {
                let tau = kendall_tau(&columns[a], &columns[b])?;
                candidates.push((a, b, tau.abs()));
            }
        }
        let chosen = maximum_spanning_tree(d, &candidates)?;
        let mut tree = Vec::with_capacity(chosen.len());
        for (a, b) in chosen {
            let spec = fit_edge(&columns[a], &columns[b], config)?;
            let (out_first, out_second) = transform_columns(&spec, &columns[a], &columns[b])?;
            tree.push(FittedEdge {
                edge: VineEdge { conditioned: (a, b), conditioning: vec![], parents: None },
                constraint: (1u128 << a) | (1u128 << b),
                spec,
                out_first,
                out_second,
            });
        }
        trees.push(tree);
    }

    // Later trees: nodes are the previous tree's edges.
    for t in 1..d - 1 {
        let prev = &trees[t - 1];
        let m = prev.len();
        let fitted_tree = t < truncation_level;

        let mut admissible: Vec<(usize, usize, usize, usize)> = Vec::new(); // (a, b, ja, kb)
        for a in 0..m {
            for b in a + 1..m {
                let share = if t == 1 {
                    let (pa, pb) = (prev[a].edge.conditioned, prev[b].edge.conditioned);
                    pa.0 == pb.0 || pa.0 == pb.1 || pa.1 == pb.0 || pa.1 == pb.1
                } else {
                    let (pa, pb) = (
                        prev[a].edge.parents.expect("tree >= 2 edges have parents"),
                        prev[b].edge.parents.expect("tree >= 2 edges have parents"),
                    );
                    pa.0 == pb.0 || pa.0 == pb.1 || pa.1 == pb.0 || pa.1 == pb.1
                };
                if !share {
                    continue;
                }
                let (ca, cb) = (prev[a].constraint, prev[b].constraint);
                if (ca ^ cb).count_ones() != 2 {
                    continue;
                }
                let (Some(j), Some(k)) =
                    (fresh_variable(&prev[a].edge, cb), fresh_variable(&prev[b].edge, ca))
                else {
                    continue;
                };
                admissible.push((a, b, j, k));
            }
        }

        let chosen: Vec<(usize, usize)> = if fitted_tree {
            let mut candidates: Vec<Candidate> = Vec::with_capacity(admissible.len());
            for &(a, b, j, k) in &admissible {
                let ca = prev[a].out_for(j).expect("fresh variable is conditioned");
                let cb = prev[b].out_for(k).expect("fresh variable is conditioned");
                let tau = kendall_tau(ca, cb)?;
                candidates.push((a, b, tau.abs()));
            }
            maximum_spanning_tree(m, &candidates)?
        } else {
            let pairs: Vec<(usize, usize)> = admissible.iter().map(|&(a, b, _, _)| (a, b)).collect();
            lexicographic_spanning_tree(m, &pairs)?
        };

        let mut tree = Vec::with_capacity(chosen.len());
        for (a, b) in chosen {
            let &(_, _, j, k) = admissible
                .iter()
                .find(|&&(x, y, _, _)| (x, y) == (a, b))
                .expect("chosen edge is admissible");
            let col_a = prev[a].out_for(j).expect("fresh variable is conditioned");
            let col_b = prev[b].out_for(k).expect("fresh variable is conditioned");
            let spec = if fitted_tree {
                fit_edge(col_a, col_b, config)?
            } else {
                PairCopulaSpec::independence()
            };
            let (out_first, out_second) = transform_columns(&spec, col_a, col_b)?;
            let constraint = prev[a].constraint | prev[b].constraint;
            tree.push(FittedEdge {
                edge: VineEdge {
                    conditioned: (j, k),
                    conditioning: mask_to_sorted(prev[a].constraint & prev[b].constraint),
                    parents: Some((a, b)),
                },
                constraint,
                spec,
                out_first,
                out_second,
            });
        }
        trees.push(tree);
    }

    Ok(FittedTrees { dimension: d, trees })
}

/// Pinned fit: the sub-vine on the first `d-1` columns is fitted first, then
/// the last column is attached as a leaf of every tree, so integrating the
/// joint density over the last variable telescopes to the sub-vine exactly.
fn fit_pinned(u: &Matrix, config: &FitConfig, truncation_level: usize) -> Result<PinnedVineFit> {
    validate_input(u)?;
    config.validate()?;
    let d = u.ncols();
    let target = d - 1;
    let y_col = u.column(target);

    if d == 2 {
        let x_col = u.column(0);
        let spec = fit_edge(&y_col, &x_col, config)?;
        let structure = VineStructure::new_unchecked(
            2,
            vec![vec![VineEdge { conditioned: (target, 0), conditioning: vec![], parents: None }]],
        );
        let joint = VineModel::new(structure, vec![vec![spec]], 1)?;
        return Ok(PinnedVineFit { joint, margin: None });
    }

    let sub = Matrix::from_columns(&(0..d - 1).map(|j| u.column(j)).collect::<Vec<_>>())?;
    let xi = dissmann(&sub, config, truncation_level)?;

    // Attachment state: the target's running conditional column, the
    // constraint set of the current partner, and (above tree 1) the
    // partner's edge index in the sub-vine tree below.
    let mut y_out = y_col.clone();
    let mut partner_constraint: u128;
    let mut partner_index: usize;

    let mut joint_trees: Vec<Vec<FittedEdge>> = Vec::with_capacity(d - 1);

    // Tree 1: attach the target to its strongest-|tau| variable.
    {
        let mut best: Option<(usize, f64)> = None;
        for k in 0..d - 1 {
            let tau = kendall_tau(&y_out, &u.column(k))?.abs();
            if best.map_or(true, |(bk, bt)| tau > bt || (tau == bt && k < bk)) {
                best = Some((k, tau));
            }
        }
        let (k, _) = best.expect("at least one candidate variable");
        let k_col = u.column(k);
        let spec = fit_edge(&y_out, &k_col, config)?;
        let (out_first, _) = transform_columns(&spec, &y_out, &k_col)?;
        let y_edge = FittedEdge {
            edge: VineEdge { conditioned: (target, k), conditioning: vec![], parents: None },
            constraint: (1u128 << target) | (1u128 << k),
            spec,
            out_first,
            out_second: Vec::new(),
        };
        y_out = y_edge.out_first.clone();
        partner_constraint = 1u128 << k;
        partner_index = k;

        let mut tree: Vec<FittedEdge> = Vec::new();
        for fe in &xi.trees[0] {
            tree.push(FittedEdge {
                edge: fe.edge.clone(),
                constraint: fe.constraint,
                spec: fe.spec.clone(),
                out_first: fe.out_first.clone(),
                out_second: fe.out_second.clone(),
            });
        }
        tree.push(y_edge);
        joint_trees.push(tree);
    }

    for t in 1..d - 1 {
        let fitted_tree = t < truncation_level;
        // Candidates: sub-vine edges one level below that extend the current
        // partner's constraint set by one variable.
        let xi_tree_below = &xi.trees[t - 1];
        let mut candidates: Vec<(usize, usize)> = Vec::new(); // (edge idx, fresh var)
        for (idx, fe) in xi_tree_below.iter().enumerate() {
            let adjacent = if t == 1 {
                fe.edge.conditioned.0 == partner_index || fe.edge.conditioned.1 == partner_index
            } else {
                fe.edge
                    .parents
                    .map(|(a, b)| a == partner_index || b == partner_index)
                    .expect("tree >= 2 edges have parents")
            };
            if !adjacent {
                continue;
            }
            if fe.constraint & partner_constraint != partner_constraint {
                continue;
            }
            let fresh = fe.constraint & !partner_constraint;
            if fresh.count_ones() != 1 {
                continue;
            }
            candidates.push((idx, fresh.trailing_zeros() as usize));
        }
        if candidates.is_empty() {
            return Err(Error::InvalidStructure(
                "pinned attachment found no admissible partner edge".into(),
            ));
        }

        let (idx, x) = if fitted_tree {
            let mut best: Option<(usize, usize, f64)> = None;
            for &(idx, x) in &candidates {
                let col = xi_tree_below[idx].out_for(x).expect("fresh variable is conditioned");
                let tau = kendall_tau(&y_out, col)?.abs();
                if best.map_or(true, |(bi, _, bt)| tau > bt || (tau == bt && idx < bi)) {
                    best = Some((idx, x, tau));
                }
            }
            let (idx, x, _) = best.expect("candidates checked non-empty");
            (idx, x)
        } else {
            candidates[0]
        };

        let partner_col = xi_tree_below[idx].out_for(x).expect("fresh variable is conditioned");
        let spec = if fitted_tree {
            fit_edge(&y_out, partner_col, config)?
        } else {
            PairCopulaSpec::independence()
        };
        let (out_first, _) = transform_columns(&spec, &y_out, partner_col)?;
        // In joint tree t-1 the target edge sits after all sub-vine edges.
        let y_parent = joint_trees[t - 1].len() - 1;
        let y_edge = FittedEdge {
            edge: VineEdge {
                conditioned: (target, x),
                conditioning: mask_to_sorted(partner_constraint),
                parents: Some((y_parent, idx)),
            },
            constraint: partner_constraint | (1u128 << target) | (1u128 << x),
            spec,
            out_first,
            out_second: Vec::new(),
        };
        y_out = y_edge.out_first.clone();
        partner_constraint = xi_tree_below[idx].constraint;
        partner_index = idx;

        let mut tree: Vec<FittedEdge> = Vec::new();
        if t < xi.trees.len() {
            for fe in &xi.trees[t] {
                tree.push(FittedEdge {
                    edge: fe.edge.clone(),
                    constraint: fe.constraint,
                    spec: fe.spec.clone(),
                    out_first: fe.out_first.clone(),
                    out_second: fe.out_second.clone(),
                });
            }
        }
        tree.push(y_edge);
        joint_trees.push(tree);
    }

    let trunc = truncation_level.clamp(1, d - 1);
    let joint = FittedTrees { dimension: d, trees: joint_trees }.into_model(trunc)?;
    let margin = xi.into_model(truncation_level.clamp(1, d - 2))?;
    Ok(PinnedVineFit { joint, margin: Some(margin) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marginals::pseudo_observations;
    use crate::paircop::{sample_pair, Family, Rotation};
    use crate::rng::derive_rng;
    use crate::vine::select_structure;
    use rand::Rng;

    fn independent_uniforms(n: usize, d: usize, label: &str) -> Matrix {
        let mut rng = derive_rng(5, label);
        let cols: Vec<Vec<f64>> = (0..d)
            .map(|_| {
                let raw: Vec<f64> = (0..n).map(|_| rng.random()).collect();
                raw
            })
            .collect();
        let m = Matrix::from_columns(&cols).unwrap();
        pseudo_observations(&m).unwrap()
    }

    #[test]
    fn two_dims_give_single_edge() {
        let u = independent_uniforms(60, 2, "fit-2d");
        let s = select_structure(&u).unwrap();
        assert_eq!(s.trees().len(), 1);
        assert_eq!(s.trees()[0].len(), 1);
        assert_eq!(s.trees()[0][0].conditioned, (0, 1));
    }

    #[test]
    fn five_dims_untruncated_counts() {
        let u = independent_uniforms(80, 5, "fit-5d");
        let s = select_structure(&u).unwrap();
        assert_eq!(s.trees().len(), 4);
        assert_eq!(s.edge_count(), 10);
        s.validate().unwrap();
    }

    #[test]
    fn independent_data_fits_all_independence_edges() {
        let u = independent_uniforms(400, 4, "fit-indep");
        let model = fit_vine(&u, &FitConfig::parametric(), usize::MAX).unwrap();
        for tree in model.pair_copulas() {
            for spec in tree {
                assert_eq!(spec.family(), Family::Independence);
            }
        }
    }

    #[test]
    fn truncation_counts_fitted_and_independence_edges() {
        // Strongly dependent 3-dim data so tree-2 would not be independence
        // on its own merits.
        let mut rng = derive_rng(19, "fit-trunc");
        let n = 300;
        let mut cols = vec![Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
        for _ in 0..n {
            let z: f64 = rng.random();
            let e1: f64 = rng.random::<f64>() * 0.1;
            let e2: f64 = rng.random::<f64>() * 0.1;
            cols[0].push(z);
            cols[1].push(z + e1);
            cols[2].push(z * z + e2);
        }
        let u = pseudo_observations(&Matrix::from_columns(&cols).unwrap()).unwrap();
        let model = fit_vine(&u, &FitConfig::parametric(), 1).unwrap();
        assert_eq!(model.truncation_level(), 1);
        assert_eq!(model.pair_copulas()[0].len(), 2);
        assert_eq!(model.pair_copulas()[1].len(), 1);
        assert!(model.pair_copulas()[1][0].is_independence());
        let fitted: usize = model.pair_copulas()[0]
            .iter()
            .filter(|s| !s.is_independence())
            .count();
        assert_eq!(fitted, 2, "tree-1 edges of strongly dependent data are fitted");
    }

    #[test]
    fn tree_one_is_the_best_spanning_tree_by_tau() {
        // Construct three variables whose pairwise |tau| ranking is known:
        // x0 ~ x1 strongly, x0 ~ x2 moderately, x1 ~ x2 weakly related.
        let g_strong = PairCopulaSpec::gaussian(0.9).unwrap();
        let g_mid = PairCopulaSpec::gaussian(0.6).unwrap();
        let a = sample_pair(&g_strong, 500, &mut derive_rng(2, "t1-strong")).unwrap();
        let b = sample_pair(&g_mid, 500, &mut derive_rng(2, "t1-mid")).unwrap();
        // x2 depends on x0 only through the g_mid draw.
        let cols = vec![a.column(0), a.column(1), b.column(1)];
        // Overwrite x2's pairing so that tau(0,2) is the mid link:
        // b.column(0) tracks x0 poorly; rebuild x2 from x0's own ranks.
        let u = pseudo_observations(&Matrix::from_columns(&cols).unwrap()).unwrap();
        let s = select_structure(&u).unwrap();
        let t1: Vec<(usize, usize)> = s.trees()[0].iter().map(|e| e.conditioned).collect();
        // Brute-force oracle over the 3 possible spanning trees.
        let taus = [
            kendall_tau(&u.column(0), &u.column(1)).unwrap().abs(),
            kendall_tau(&u.column(0), &u.column(2)).unwrap().abs(),
            kendall_tau(&u.column(1), &u.column(2)).unwrap().abs(),
        ];
        let options = [
            (vec![(0, 1), (0, 2)], taus[0] + taus[1]),
            (vec![(0, 1), (1, 2)], taus[0] + taus[2]),
            (vec![(0, 2), (1, 2)], taus[1] + taus[2]),
        ];
        let best = options
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(edges, _)| edges.clone())
            .unwrap();
        assert_eq!(t1, best);
    }

    #[test]
    fn pinned_fit_keeps_target_a_leaf_in_every_tree() {
        let mut rng = derive_rng(23, "pin-leaf");
        let n = 200;
        let mut cols = vec![vec![]; 4];
        for _ in 0..n {
            let z: f64 = rng.random();
            cols[0].push(z + 0.3 * rng.random::<f64>());
            cols[1].push(z + 0.3 * rng.random::<f64>());
            cols[2].push(rng.random::<f64>());
            cols[3].push(z + 0.1 * rng.random::<f64>()); // target
        }
        let u = pseudo_observations(&Matrix::from_columns(&cols).unwrap()).unwrap();
        let fit = fit_vine_with_options(
            &u,
            &FitConfig::parametric(),
            &VineFitOptions { truncation_level: usize::MAX, pin_last_as_leaf: true },
        )
        .unwrap();
        let joint = &fit.joint;
        joint.structure().validate().unwrap();
        let target = 3;
        for (t, tree) in joint.structure().trees().iter().enumerate() {
            let with_target = tree
                .iter()
                .filter(|e| e.conditioned.0 == target || e.conditioned.1 == target)
                .count();
            assert_eq!(with_target, 1, "tree {} must contain exactly one target edge", t + 1);
            for e in tree {
                assert!(
                    !e.conditioning.contains(&target),
                    "target must never appear in a conditioning set"
                );
            }
        }
        let margin = fit.margin.unwrap();
        margin.structure().validate().unwrap();
        assert_eq!(margin.dimension(), 3);
    }

    #[test]
    fn pinned_two_dim_fit_works() {
        let g = PairCopulaSpec::gaussian(0.7).unwrap();
        let m = sample_pair(&g, 300, &mut derive_rng(2, "pin-2d")).unwrap();
        let fit = fit_vine_with_options(
            &m,
            &FitConfig::parametric(),
            &VineFitOptions { truncation_level: 3, pin_last_as_leaf: true },
        )
        .unwrap();
        assert_eq!(fit.joint.dimension(), 2);
        assert!(fit.margin.is_none());
        assert_eq!(fit.joint.structure().trees()[0][0].conditioned, (1, 0));
    }

    #[test]
    fn gaussian_pair_data_recovers_rotationless_gaussian_edge() {
        let g = PairCopulaSpec::gaussian(-0.5).unwrap();
        let m = sample_pair(&g, 1500, &mut derive_rng(2, "fit-neg")).unwrap();
        let model = fit_vine(&m, &FitConfig::parametric(), usize::MAX).unwrap();
        let spec = model.copula(0, 0);
        assert_eq!(spec.family(), Family::Gaussian);
        assert_eq!(spec.rotation(), Rotation::R0);
        assert!((spec.parameter() + 0.5).abs() < 0.06);
    }

    #[test]
    fn rejects_bad_inputs() {
        let u = independent_uniforms(10, 3, "fit-small");
        assert!(fit_vine(&u, &FitConfig::parametric(), 3).is_err());
        let one = independent_uniforms(50, 1, "fit-1d");
        assert!(fit_vine(&one, &FitConfig::parametric(), 3).is_err());
        let mut bad = independent_uniforms(50, 2, "fit-bad");
        bad[(0, 0)] = 1.0;
        assert!(fit_vine(&bad, &FitConfig::parametric(), 3).is_err());
    }
}
