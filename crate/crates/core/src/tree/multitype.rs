//! Multitype trees, flat trees and degree sequences.

use std::collections::BTreeMap;

use super::plane::PlaneTree;
use crate::error::{Error, Result};

/// A plane tree with a type label per vertex (0-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultitypeTree {
    shape: PlaneTree,
    types: Vec<u16>,
}

impl MultitypeTree {
    pub fn new(shape: PlaneTree, types: Vec<u16>) -> Result<Self> {
        if types.len() != shape.len() {
            return Err(Error::Codec(format!(
                "{} type labels for {} vertices",
                types.len(),
                shape.len()
            )));
        }
        Ok(MultitypeTree { shape, types })
    }

    pub fn from_parents(parents: &[u32], types: Vec<u16>) -> Result<Self> {
        Self::new(PlaneTree::from_parents(parents)?, types)
    }

    /// Every vertex of type 0.
    pub fn monotype(shape: PlaneTree) -> Self {
        let types = vec![0; shape.len()];
        MultitypeTree { shape, types }
    }

    pub(crate) fn from_parts_unchecked(shape: PlaneTree, types: Vec<u16>) -> Self {
        debug_assert_eq!(shape.len(), types.len());
        MultitypeTree { shape, types }
    }

    pub fn shape(&self) -> &PlaneTree {
        &self.shape
    }

    pub fn types(&self) -> &[u16] {
        &self.types
    }

    pub fn type_of(&self, v: usize) -> usize {
        self.types[v] as usize
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn root_type(&self) -> usize {
        self.types[0] as usize
    }

    /// `#_i(T)` for `i < num_types`.
    pub fn type_counts(&self, num_types: usize) -> Vec<u64> {
        let mut c = vec![0u64; num_types];
        for &t in &self.types {
            c[t as usize] += 1;
        }
        c
    }

    /// `#_λ(T) = Σ λ_i #_i(T)`.
    pub fn weighted_size(&self, lambda: &[u64]) -> u64 {
        self.types.iter().map(|&t| lambda[t as usize]).sum()
    }

    /// Number of type-0 vertices having exactly `d` children of type 0.
    pub fn n_d_counts(&self) -> BTreeMap<usize, usize> {
        let mut m = BTreeMap::new();
        for v in 0..self.len() {
            if self.types[v] == 0 {
                let d = self
                    .shape
                    .children(v)
                    .iter()
                    .filter(|&&c| self.types[c as usize] == 0)
                    .count();
                *m.entry(d).or_insert(0) += 1;
            }
        }
        m
    }

    /// Per-vertex child counts by type.
    pub fn child_type_counts(&self, v: usize, num_types: usize) -> Vec<u32> {
        let mut k = vec![0u32; num_types];
        for &c in self.shape.children(v) {
            k[self.types[c as usize] as usize] += 1;
        }
        k
    }

    pub fn max_type(&self) -> usize {
        self.types.iter().copied().max().unwrap_or(0) as usize
    }
}

/// Outdegree histogram of a plane tree.
pub fn outdegree_counts(t: &PlaneTree) -> BTreeMap<usize, usize> {
    let mut m = BTreeMap::new();
    for v in 0..t.len() {
        *m.entry(t.outdegree(v)).or_insert(0) += 1;
    }
    m
}

/// A multitype tree in which every non-type-0 vertex is a leaf and the
/// children of each vertex have nondecreasing types.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FlatTree(MultitypeTree);

impl FlatTree {
    pub fn new(tree: MultitypeTree) -> Result<Self> {
        if tree.root_type() != 0 {
            return Err(Error::RootType {
                found: tree.root_type() + 1,
            });
        }
        for v in 0..tree.len() {
            let kids = tree.shape().children(v);
            if tree.types[v] != 0 && !kids.is_empty() {
                return Err(Error::DecorationMismatch {
                    vertex: v,
                    reason: "a vertex of type other than 1 has children".into(),
                });
            }
            if kids
                .windows(2)
                .any(|w| tree.types[w[0] as usize] > tree.types[w[1] as usize])
            {
                return Err(Error::DecorationMismatch {
                    vertex: v,
                    reason: "children are not sorted by type".into(),
                });
            }
        }
        Ok(FlatTree(tree))
    }

    pub(crate) fn new_unchecked(tree: MultitypeTree) -> Self {
        FlatTree(tree)
    }

    pub fn tree(&self) -> &MultitypeTree {
        &self.0
    }

    pub fn into_tree(self) -> MultitypeTree {
        self.0
    }

    /// Type-0 vertices in preorder.
    pub fn type1_vertices(&self) -> Vec<usize> {
        (0..self.0.len())
            .filter(|&v| self.0.types[v] == 0)
            .collect()
    }
}

/// A flat tree with a distinguished type-0 vertex and the path to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedFlatTree {
    pub tree: FlatTree,
    pub spine: Vec<usize>,
    pub mark: usize,
}

/// Unordered multiset of (vertex type, child counts by type), stored sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DegreeSequence {
    pub entries: Vec<(u16, Vec<u32>)>,
}

impl DegreeSequence {
    pub fn new(mut entries: Vec<(u16, Vec<u32>)>) -> Self {
        entries.sort();
        DegreeSequence { entries }
    }

    /// Monotype sequence from a list of outdegrees.
    pub fn monotype(degrees: &[u32]) -> Self {
        Self::new(degrees.iter().map(|&d| (0, vec![d])).collect())
    }

    /// `Σ_i k_i(j) = #{i : ℓ_i = j} - 1{j = 0}` for every type j.
    pub fn is_admissible(&self) -> bool {
        let Some(width) = self.entries.first().map(|e| e.1.len()) else {
            return false;
        };
        if self
            .entries
            .iter()
            .any(|(t, k)| k.len() != width || *t as usize >= width)
        {
            return false;
        }
        (0..width).all(|j| {
            let children: u64 = self.entries.iter().map(|(_, k)| k[j] as u64).sum();
            let vertices = self
                .entries
                .iter()
                .filter(|(t, _)| *t as usize == j)
                .count() as u64;
            children + (j == 0) as u64 == vertices
        })
    }

    pub fn outdegrees(&self) -> Option<Vec<u32>> {
        self.entries
            .iter()
            .map(|(t, k)| (*t == 0 && k.len() == 1).then_some(k[0]))
            .collect()
    }
}

pub fn degree_sequence(t: &MultitypeTree, num_types: usize) -> DegreeSequence {
    DegreeSequence::new(
        (0..t.len())
            .map(|v| (t.types[v], t.child_type_counts(v, num_types)))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_weights() {
        let t = MultitypeTree::from_parents(&[0, 0, 1, 0], vec![0, 1, 0, 2]).unwrap();
        assert_eq!(t.type_counts(3), vec![2, 1, 1]);
        assert_eq!(t.weighted_size(&[1, 0, 0]), 2);
        assert_eq!(t.weighted_size(&[1, 2, 3]), 7);
    }

    #[test]
    fn degree_sequence_examples() {
        let single = MultitypeTree::monotype(PlaneTree::single());
        let ds = degree_sequence(&single, 1);
        assert_eq!(ds.entries, vec![(0, vec![0])]);
        assert!(ds.is_admissible());
        let cherry = MultitypeTree::monotype(PlaneTree::from_parents(&[0, 0, 0]).unwrap());
        let ds = degree_sequence(&cherry, 1);
        assert_eq!(ds, DegreeSequence::monotype(&[2, 0, 0]));
        assert!(ds.is_admissible());
        assert!(!DegreeSequence::monotype(&[1]).is_admissible());
    }

    #[test]
    fn n_d_counts_examples() {
        let single = MultitypeTree::monotype(PlaneTree::single());
        assert_eq!(single.n_d_counts(), BTreeMap::from([(0, 1)]));
        let cherry = MultitypeTree::monotype(PlaneTree::from_parents(&[0, 0, 0]).unwrap());
        assert_eq!(cherry.n_d_counts(), BTreeMap::from([(0, 2), (2, 1)]));
    }

    #[test]
    fn flat_tree_validation() {
        let ok = MultitypeTree::from_parents(&[0, 0, 0], vec![0, 0, 1]).unwrap();
        assert!(FlatTree::new(ok).is_ok());
        let unsorted = MultitypeTree::from_parents(&[0, 0, 0], vec![0, 1, 0]).unwrap();
        assert!(FlatTree::new(unsorted).is_err());
        let internal = MultitypeTree::from_parents(&[0, 0, 1], vec![0, 1, 0]).unwrap();
        assert!(FlatTree::new(internal).is_err());
    }
}
