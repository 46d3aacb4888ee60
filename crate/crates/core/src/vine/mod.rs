//! Vine copulas: structure selection, cascade fitting, joint density,
//! Rosenblatt transforms and simulation.
//!
//! A vine on `d` variables is a sequence of `d-1` nested trees. Tree 1 spans
//! the variables; every later tree's nodes are the previous tree's edges, and
//! two nodes may only be joined when the corresponding edges share a node
//! (the proximity condition). Each edge carries one bivariate copula; the
//! joint copula density is the product of all edge copulas evaluated at
//! h-transformed arguments. Trees above the truncation level carry
//! independence copulas.

mod evaluate;
mod fitting;
mod select;

pub use evaluate::{inverse_rosenblatt, rosenblatt, sample_vine, vine_log_pdf, vine_pdf};
pub use fitting::{fit_vine, fit_vine_with_options, PinnedVineFit, VineFitOptions};
pub use select::select_structure;

pub(crate) use evaluate::{
    cascade_outputs, edge_argument_sources, CascadeOuts, CascadePlan, EdgeArgSource, TargetChain,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paircop::PairCopulaSpec;

/// Largest supported vine dimension; constraint sets are tracked as `u128`
/// bitmasks.
pub const MAX_DIMENSION: usize = 128;

/// One edge of a vine tree.
///
/// `conditioned.0` always descends from `parents.0` and `conditioned.1` from
/// `parents.1`; the edge's copula is fitted in that argument order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VineEdge {
    pub conditioned: (usize, usize),
    pub conditioning: Vec<usize>,
    /// Indices into the previous tree's edge list; `None` in the first tree.
    pub parents: Option<(usize, usize)>,
}

impl VineEdge {
    pub(crate) fn constraint_mask(&self) -> u128 {
        let mut mask = (1u128 << self.conditioned.0) | (1u128 << self.conditioned.1);
        for &v in &self.conditioning {
            mask |= 1u128 << v;
        }
        mask
    }

    /// Which slot of the conditioned pair `var` occupies, if any.
    pub(crate) fn slot_of(&self, var: usize) -> Option<Slot> {
        if self.conditioned.0 == var {
            Some(Slot::First)
        } else if self.conditioned.1 == var {
            Some(Slot::Second)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Slot {
    First,
    Second,
}

/// The tree sequence of a vine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VineStructure {
    dimension: usize,
    trees: Vec<Vec<VineEdge>>,
}

impl VineStructure {
    /// Builds a structure and validates it; see [`VineStructure::validate`].
    pub fn new(dimension: usize, trees: Vec<Vec<VineEdge>>) -> Result<Self> {
        let s = Self { dimension, trees };
        s.validate()?;
        Ok(s)
    }

    pub(crate) fn new_unchecked(dimension: usize, trees: Vec<Vec<VineEdge>>) -> Self {
        Self { dimension, trees }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn trees(&self) -> &[Vec<VineEdge>] {
        &self.trees
    }

    pub fn edge_count(&self) -> usize {
        self.trees.iter().map(Vec::len).sum()
    }

    /// Checks the vine validity conditions: (i) the first tree spans the
    /// variables, (ii) every later tree is a spanning tree on the previous
    /// tree's edges, (iii) joined edges share a node. Also verifies that the
    /// recorded conditioned/conditioning sets match the parents and that
    /// every edge can be wired into the h-function cascade.
    pub fn validate(&self) -> Result<()> {
        let d = self.dimension;
        if d < 2 {
            return Err(Error::InvalidStructure(format!("dimension must be >= 2, got {d}")));
        }
        if d > MAX_DIMENSION {
            return Err(Error::InvalidStructure(format!(
                "dimension {d} exceeds the supported maximum {MAX_DIMENSION}"
            )));
        }
        if self.trees.len() != d - 1 {
            return Err(Error::InvalidStructure(format!(
                "expected {} trees, got {}",
                d - 1,
                self.trees.len()
            )));
        }
        for (t, tree) in self.trees.iter().enumerate() {
            let node_count = d - t;
            if tree.len() != node_count - 1 {
                return Err(Error::InvalidStructure(format!(
                    "tree {} must have {} edges, got {}",
                    t + 1,
                    node_count - 1,
                    tree.len()
                )));
            }
            let mut uf = UnionFind::new(node_count);
            for (idx, edge) in tree.iter().enumerate() {
                let (j, k) = edge.conditioned;
                if j == k || j >= d || k >= d {
                    return Err(Error::InvalidStructure(format!(
                        "tree {} edge {idx} has invalid conditioned pair ({j},{k})",
                        t + 1
                    )));
                }
                if edge.conditioning.len() != t {
                    return Err(Error::InvalidStructure(format!(
                        "tree {} edge {idx} must condition on {t} variables, got {}",
                        t + 1,
                        edge.conditioning.len()
                    )));
                }
                let (a, b) = if t == 0 {
                    if edge.parents.is_some() {
                        return Err(Error::InvalidStructure(
                            "first-tree edges must not reference parents".into(),
                        ));
                    }
                    (j, k)
                } else {
                    let (a, b) = edge.parents.ok_or_else(|| {
                        Error::InvalidStructure(format!(
                            "tree {} edge {idx} is missing parent references",
                            t + 1
                        ))
                    })?;
                    if a == b || a >= node_count || b >= node_count {
                        return Err(Error::InvalidStructure(format!(
                            "tree {} edge {idx} has invalid parents ({a},{b})",
                            t + 1
                        )));
                    }
                    let prev = &self.trees[t - 1];
                    // Proximity: the two previous-tree edges share a node.
                    let share = if t == 1 {
                        let (pa, pb) = (prev[a].conditioned, prev[b].conditioned);
                        pa.0 == pb.0 || pa.0 == pb.1 || pa.1 == pb.0 || pa.1 == pb.1
                    } else {
                        let (pa, pb) = (
                            prev[a].parents.expect("validated in previous tree"),
                            prev[b].parents.expect("validated in previous tree"),
                        );
                        pa.0 == pb.0 || pa.0 == pb.1 || pa.1 == pb.0 || pa.1 == pb.1
                    };
                    if !share {
                        return Err(Error::InvalidStructure(format!(
                            "tree {} edge {idx} joins non-adjacent edges {a} and {b}",
                            t + 1
                        )));
                    }
                    // Set consistency with the parents' constraint sets.
                    let ca = prev[a].constraint_mask();
                    let cb = prev[b].constraint_mask();
                    let inter = ca & cb;
                    let sym = ca ^ cb;
                    if sym.count_ones() != 2 {
                        return Err(Error::InvalidStructure(format!(
                            "tree {} edge {idx}: parents' constraint sets do not differ by a pair",
                            t + 1
                        )));
                    }
                    if sym & (1u128 << j) == 0
                        || sym & (1u128 << k) == 0
                        || ca & (1u128 << j) == 0
                        || cb & (1u128 << k) == 0
                    {
                        return Err(Error::InvalidStructure(format!(
                            "tree {} edge {idx}: conditioned pair ({j},{k}) does not match parents",
                            t + 1
                        )));
                    }
                    let mut cond_mask = 0u128;
                    for &v in &edge.conditioning {
                        if v >= d {
                            return Err(Error::InvalidStructure(format!(
                                "tree {} edge {idx} conditions on out-of-range variable {v}",
                                t + 1
                            )));
                        }
                        cond_mask |= 1u128 << v;
                    }
                    if cond_mask != inter {
                        return Err(Error::InvalidStructure(format!(
                            "tree {} edge {idx}: conditioning set does not match parents",
                            t + 1
                        )));
                    }
                    // Cascade wiring: each conditioned variable must sit in
                    // the conditioned set of the parent that provides it.
                    if prev[a].slot_of(j).is_none() || prev[b].slot_of(k).is_none() {
                        return Err(Error::InvalidStructure(format!(
                            "tree {} edge {idx}: conditional value ({j}|{k}) is not produced by the parents",
                            t + 1
                        )));
                    }
                    (a, b)
                };
                if !uf.union(a, b) {
                    return Err(Error::InvalidStructure(format!(
                        "tree {} is not acyclic at edge {idx}",
                        t + 1
                    )));
                }
            }
            if uf.components() != 1 {
                return Err(Error::InvalidStructure(format!("tree {} is not connected", t + 1)));
            }
        }
        Ok(())
    }
}

/// A fitted vine: structure, one pair copula per edge, truncation level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VineModel {
    structure: VineStructure,
    pair_copulas: Vec<Vec<PairCopulaSpec>>,
    truncation_level: usize,
}

impl VineModel {
    pub fn new(
        structure: VineStructure,
        pair_copulas: Vec<Vec<PairCopulaSpec>>,
        truncation_level: usize,
    ) -> Result<Self> {
        structure.validate()?;
        let d = structure.dimension();
        if truncation_level == 0 || truncation_level > d - 1 {
            return Err(Error::InvalidInput(format!(
                "truncation level must be in [1, {}], got {truncation_level}",
                d - 1
            )));
        }
        if pair_copulas.len() != structure.trees().len() {
            return Err(Error::DimensionMismatch {
                expected: structure.trees().len(),
                got: pair_copulas.len(),
            });
        }
        for (t, (tree, cops)) in structure.trees().iter().zip(&pair_copulas).enumerate() {
            if tree.len() != cops.len() {
                return Err(Error::DimensionMismatch { expected: tree.len(), got: cops.len() });
            }
            if t >= truncation_level && !cops.iter().all(PairCopulaSpec::is_independence) {
                return Err(Error::InvalidInput(format!(
                    "tree {} lies above truncation level {truncation_level} and must be independence",
                    t + 1
                )));
            }
        }
        Ok(Self { structure, pair_copulas, truncation_level })
    }

    pub fn structure(&self) -> &VineStructure {
        &self.structure
    }

    pub fn dimension(&self) -> usize {
        self.structure.dimension()
    }

    pub fn truncation_level(&self) -> usize {
        self.truncation_level
    }

    pub fn pair_copulas(&self) -> &[Vec<PairCopulaSpec>] {
        &self.pair_copulas
    }

    pub fn copula(&self, tree: usize, edge: usize) -> &PairCopulaSpec {
        &self.pair_copulas[tree][edge]
    }

    /// Serializes to the documented JSON schema.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Deserializes and re-validates a model written by [`to_json`](Self::to_json).
    pub fn from_json(json: &str) -> Result<Self> {
        let model: VineModel = serde_json::from_str(json)?;
        Self::new(model.structure, model.pair_copulas, model.truncation_level)
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    components: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), components: n }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already connected.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        self.components -= 1;
        true
    }

    pub fn components(&self) -> usize {
        self.components
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_dim_structure() -> VineStructure {
        // T1: (0,1), (1,2); T2: (0,2 | 1).
        VineStructure::new(
            3,
            vec![
                vec![
                    VineEdge { conditioned: (0, 1), conditioning: vec![], parents: None },
                    VineEdge { conditioned: (1, 2), conditioning: vec![], parents: None },
                ],
                vec![VineEdge { conditioned: (0, 2), conditioning: vec![1], parents: Some((0, 1)) }],
            ],
        )
        .unwrap()
    }

    #[test]
    fn valid_three_dim_structure_passes() {
        three_dim_structure();
    }

    #[test]
    fn disconnected_first_tree_is_rejected() {
        let r = VineStructure::new(
            3,
            vec![
                vec![
                    VineEdge { conditioned: (0, 1), conditioning: vec![], parents: None },
                    VineEdge { conditioned: (0, 1), conditioning: vec![], parents: None },
                ],
                vec![VineEdge { conditioned: (0, 2), conditioning: vec![1], parents: Some((0, 1)) }],
            ],
        );
        assert!(r.is_err());
    }

    #[test]
    fn wrong_conditioning_set_is_rejected() {
        let r = VineStructure::new(
            3,
            vec![
                vec![
                    VineEdge { conditioned: (0, 1), conditioning: vec![], parents: None },
                    VineEdge { conditioned: (1, 2), conditioning: vec![], parents: None },
                ],
                vec![VineEdge { conditioned: (0, 2), conditioning: vec![2], parents: Some((0, 1)) }],
            ],
        );
        assert!(r.is_err());
    }

    #[test]
    fn truncated_model_requires_independence_above_level() {
        let s = three_dim_structure();
        let gauss = PairCopulaSpec::gaussian(0.5).unwrap();
        let indep = PairCopulaSpec::independence();
        assert!(VineModel::new(
            s.clone(),
            vec![vec![gauss.clone(), gauss.clone()], vec![gauss.clone()]],
            1
        )
        .is_err());
        assert!(VineModel::new(s, vec![vec![gauss.clone(), gauss], vec![indep]], 1).is_ok());
    }
}
