//! Greedy structure selection: per-tree maximum spanning trees on |tau|.

use super::fitting::dissmann;
use super::{UnionFind, VineStructure};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::paircop::FitConfig;

/// Candidate edge for a spanning tree: `(a, b, weight)` with `a < b`.
pub(crate) type Candidate = (usize, usize, f64);

/// Maximum spanning tree via Prim's algorithm with deterministic
/// lexicographic tie-breaking on `(min node, max node)`.
pub(crate) fn maximum_spanning_tree(
    node_count: usize,
    candidates: &[Candidate],
) -> Result<Vec<(usize, usize)>> {
    if node_count == 0 {
        return Err(Error::InvalidStructure("spanning tree over zero nodes".into()));
    }
    if node_count == 1 {
        return Ok(Vec::new());
    }
    let mut in_tree = vec![false; node_count];
    in_tree[0] = true;
    let mut chosen = Vec::with_capacity(node_count - 1);
    for _ in 0..node_count - 1 {
        let mut best: Option<Candidate> = None;
        for &(a, b, w) in candidates {
            if in_tree[a] == in_tree[b] {
                continue;
            }
            let better = match best {
                None => true,
                Some((ba, bb, bw)) => w > bw || (w == bw && (a, b) < (ba, bb)),
            };
            if better {
                best = Some((a, b, w));
            }
        }
        let (a, b, _) = best.ok_or_else(|| {
            Error::InvalidStructure("proximity graph is not connected".into())
        })?;
        in_tree[a] = true;
        in_tree[b] = true;
        chosen.push((a, b));
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Deterministic spanning tree for trees above the truncation level, where
/// no dependence weight is needed: admissible pairs in lexicographic order.
pub(crate) fn lexicographic_spanning_tree(
    node_count: usize,
    admissible: &[(usize, usize)],
) -> Result<Vec<(usize, usize)>> {
    let mut uf = UnionFind::new(node_count);
    let mut chosen = Vec::with_capacity(node_count.saturating_sub(1));
    let mut pairs = admissible.to_vec();
    pairs.sort_unstable();
    for (a, b) in pairs {
        if uf.union(a, b) {
            chosen.push((a, b));
            if chosen.len() == node_count - 1 {
                break;
            }
        }
    }
    if chosen.len() + 1 != node_count {
        return Err(Error::InvalidStructure("proximity graph is not connected".into()));
    }
    Ok(chosen)
}

/// Selects a vine structure for pseudo-observations by the greedy cascade:
/// tree 1 is the maximum spanning tree under |tau| weights on the complete
/// graph; later trees are maximum spanning trees on the proximity-admissible
/// graphs of h-transformed pseudo-observations.
///
/// The h-transforms require fitted edge copulas; parametric fits are used
/// here and discarded, keeping selection fast.
pub fn select_structure(u: &Matrix) -> Result<VineStructure> {
    let fitted = dissmann(u, &FitConfig::parametric(), usize::MAX)?;
    Ok(fitted.into_structure())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_rng;
    use rand::Rng;

    #[test]
    fn mst_brute_force_three_nodes() {
        // All 3 spanning trees of K3 enumerated by hand: {01,02} beats
        // {01,12} and {02,12} under weights 01:0.6, 02:0.5, 12:0.1.
        let cands = vec![(0, 1, 0.6), (0, 2, 0.5), (1, 2, 0.1)];
        let t = maximum_spanning_tree(3, &cands).unwrap();
        assert_eq!(t, vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn mst_matches_exhaustive_search_on_random_graphs() {
        // Oracle: enumerate all spanning trees of K5 by brute force over
        // edge subsets and compare total weights.
        let mut rng = derive_rng(13, "mst-oracle");
        for _ in 0..10 {
            let n = 5;
            let mut cands = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    cands.push((a, b, rng.random::<f64>()));
                }
            }
            let picked = maximum_spanning_tree(n, &cands).unwrap();
            let picked_weight: f64 = picked
                .iter()
                .map(|&(a, b)| cands.iter().find(|c| (c.0, c.1) == (a, b)).unwrap().2)
                .sum();

            let mut best = f64::NEG_INFINITY;
            let m = cands.len();
            for mask in 0u32..(1 << m) {
                if mask.count_ones() != (n - 1) as u32 {
                    continue;
                }
                let mut uf = UnionFind::new(n);
                let mut ok = true;
                let mut w = 0.0;
                for (i, &(a, b, cw)) in cands.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        if !uf.union(a, b) {
                            ok = false;
                            break;
                        }
                        w += cw;
                    }
                }
                if ok && uf.components() == 1 {
                    best = best.max(w);
                }
            }
            assert!((picked_weight - best).abs() < 1e-12, "prim {picked_weight} vs {best}");
        }
    }

    #[test]
    fn mst_tie_break_is_lexicographic() {
        let cands = vec![(0, 1, 0.5), (0, 2, 0.5), (1, 2, 0.5)];
        let t = maximum_spanning_tree(3, &cands).unwrap();
        assert_eq!(t, vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn mst_detects_disconnected_graph() {
        assert!(maximum_spanning_tree(3, &[(0, 1, 1.0)]).is_err());
    }
}
