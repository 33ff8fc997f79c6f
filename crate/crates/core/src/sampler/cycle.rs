//! Cycle-lemma arrangement of outdegree sequences.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::tree::{DegreeSequence, PlaneTree};

/// Start index of the unique rotation whose partial sums of `(d - 1)` stay
/// nonnegative before the last step. `degrees` must sum to `len - 1`.
pub fn rotation_index(degrees: &[u32]) -> usize {
    let mut s = 0i64;
    let mut best = i64::MAX;
    let mut at = 0;
    for (i, &d) in degrees.iter().enumerate() {
        s += d as i64 - 1;
        if s < best {
            best = s;
            at = i + 1;
        }
    }
    at % degrees.len().max(1)
}

/// Whether `degrees`, read in order, is the preorder outdegree list of a tree.
pub fn is_lukasiewicz(degrees: &[u32]) -> bool {
    let mut s = 0i64;
    for (i, &d) in degrees.iter().enumerate() {
        s += d as i64 - 1;
        if s < 0 {
            return i + 1 == degrees.len() && s == -1;
        }
    }
    false
}

/// All rotation offsets yielding a valid tree, by brute force.
pub fn valid_rotations(degrees: &[u32]) -> Vec<usize> {
    let n = degrees.len();
    let mut buf = vec![0u32; n];
    (0..n)
        .filter(|&r| {
            for i in 0..n {
                buf[i] = degrees[(r + i) % n];
            }
            is_lukasiewicz(&buf)
        })
        .collect()
}

/// Rotates `seq` in place so that its image under `deg` is a Łukasiewicz path.
pub fn rotate_to_tree<T>(seq: &mut [T], deg: impl Fn(&T) -> u32) {
    let degrees: Vec<u32> = seq.iter().map(deg).collect();
    let r = rotation_index(&degrees);
    seq.rotate_left(r);
}

/// Uniform plane tree with the given multiset of outdegrees: a uniform
/// shuffle followed by the unique valid rotation.
pub fn sample_degree_sequence_tree<R: Rng + ?Sized>(
    k: &DegreeSequence,
    rng: &mut R,
) -> Result<PlaneTree> {
    if !k.is_admissible() {
        return Err(Error::Inadmissible);
    }
    let mut degrees = k.outdegrees().ok_or(Error::Inadmissible)?;
    degrees.shuffle(rng);
    let r = rotation_index(&degrees);
    degrees.rotate_left(r);
    PlaneTree::from_outdegrees(&degrees)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cherry_has_one_rotation() {
        for seq in [[2, 0, 0], [0, 2, 0], [0, 0, 2]] {
            assert_eq!(valid_rotations(&seq).len(), 1);
            let r = rotation_index(&seq);
            assert_eq!(valid_rotations(&seq), vec![r]);
        }
    }

    #[test]
    fn single_vertex() {
        assert_eq!(rotation_index(&[0]), 0);
        assert!(is_lukasiewicz(&[0]));
    }
}
