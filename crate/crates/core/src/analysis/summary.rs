//! Per-tree statistics gathered once and shared by every report.

use serde::Serialize;

use crate::error::Result;
use crate::tree::{blobs, MultitypeTree};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeSummary {
    /// `#_λ` of the tree.
    pub weighted_size: u64,
    pub vertices: u64,
    pub height: u32,
    /// Number of type-0 vertices, `ℓ`.
    pub type0: u64,
    /// `N_d` of the reduced tree, indexed by `d`.
    pub reduced_degrees: Vec<u64>,
    /// Largest outdegree of the flattened tree.
    pub max_outdegree: u64,
    /// Largest number of vertices owned by one blob.
    pub max_blob_size: u64,
}

impl TreeSummary {
    /// Needs a type-0 root.
    pub fn new(tree: &MultitypeTree, lambda: &[u64]) -> Result<Self> {
        let b = blobs(tree)?;
        let mut reduced_degrees = Vec::new();
        let (mut max_out, mut max_size) = (0u64, 0u64);
        for r in 0..b.roots().len() {
            let d = b.frontier(r).len();
            if reduced_degrees.len() <= d {
                reduced_degrees.resize(d + 1, 0);
            }
            reduced_degrees[d] += 1;
            let size = b.size(r) as u64;
            max_size = max_size.max(size);
            max_out = max_out.max(d as u64 + size - 1);
        }
        Ok(TreeSummary {
            weighted_size: tree.weighted_size(lambda),
            vertices: tree.len() as u64,
            height: tree.shape().height(),
            type0: b.roots().len() as u64,
            reduced_degrees,
            max_outdegree: max_out,
            max_blob_size: max_size,
        })
    }

    pub fn max_reduced_outdegree(&self) -> usize {
        self.reduced_degrees.len().saturating_sub(1)
    }

    /// `Σ d² N_d`.
    pub fn reduced_second_moment(&self) -> f64 {
        self.reduced_degrees
            .iter()
            .enumerate()
            .map(|(d, &c)| (d * d) as f64 * c as f64)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::PlaneTree;

    #[test]
    fn monotype_cherry() {
        let t = MultitypeTree::monotype(PlaneTree::from_outdegrees(&[2, 0, 0]).unwrap());
        let s = TreeSummary::new(&t, &[1]).unwrap();
        assert_eq!(s.weighted_size, 3);
        assert_eq!(s.height, 1);
        assert_eq!(s.reduced_degrees, vec![2, 0, 1]);
        assert_eq!(s.max_outdegree, 2);
        assert_eq!(s.max_blob_size, 1);
        assert_eq!(s.reduced_second_moment(), 4.0);
    }

    #[test]
    fn blob_with_interior_vertex() {
        // 0 -> 1 -> (0, 0)
        let t = MultitypeTree::from_parents(&[u32::MAX, 0, 1, 1], vec![0, 1, 0, 0]).unwrap();
        let s = TreeSummary::new(&t, &[1, 1]).unwrap();
        assert_eq!(s.type0, 3);
        assert_eq!(s.reduced_degrees, vec![2, 0, 1]);
        assert_eq!(s.max_blob_size, 2);
        assert_eq!(s.max_outdegree, 3);
        assert_eq!(s.height, 2);
    }
}
