//! Plane trees stored as parent arrays in DFS (lexicographic) order.

use crate::error::{Error, Result};

pub const NO_PARENT: u32 = u32::MAX;

/// A rooted plane tree. Vertex 0 is the root and vertices are numbered in
/// depth-first preorder, so `parent[i] < i` for every `i > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlaneTree {
    parent: Vec<u32>,
    child_start: Vec<u32>,
    children: Vec<u32>,
}

impl PlaneTree {
    /// Builds a tree from a parent array (`parent[0]` is ignored), checking
    /// that the numbering is a depth-first preorder.
    pub fn from_parents(parents: &[u32]) -> Result<Self> {
        if parents.is_empty() {
            return Err(Error::Codec("a tree has at least one vertex".into()));
        }
        let n = parents.len();
        let mut stack: Vec<u32> = vec![0];
        for (i, &p) in parents.iter().enumerate().skip(1) {
            if p as usize >= i {
                return Err(Error::Codec(format!(
                    "parent of vertex {i} is {p}, not an earlier vertex"
                )));
            }
            while let Some(&top) = stack.last() {
                if top == p {
                    break;
                }
                stack.pop();
            }
            if stack.is_empty() {
                return Err(Error::Codec(format!("vertex {i} breaks depth-first order")));
            }
            stack.push(i as u32);
        }
        let mut parent = parents.to_vec();
        parent[0] = NO_PARENT;
        Ok(Self::from_preorder_parents_unchecked(parent, n))
    }

    /// Trusted constructor: `parent` must already be a DFS-order parent array
    /// with `parent[0] == NO_PARENT`.
    pub(crate) fn from_preorder_parents_unchecked(parent: Vec<u32>, n: usize) -> Self {
        let mut child_start = vec![0u32; n + 1];
        for &p in &parent[1..] {
            child_start[p as usize + 1] += 1;
        }
        for i in 0..n {
            child_start[i + 1] += child_start[i];
        }
        let mut fill = child_start.clone();
        let mut children = vec![0u32; n.saturating_sub(1)];
        for (i, &p) in parent.iter().enumerate().skip(1) {
            let slot = &mut fill[p as usize];
            children[*slot as usize] = i as u32;
            *slot += 1;
        }
        PlaneTree {
            parent,
            child_start,
            children,
        }
    }

    /// Builds a tree from outdegrees listed in preorder (a Łukasiewicz word).
    pub fn from_outdegrees(degrees: &[u32]) -> Result<Self> {
        let n = degrees.len();
        if n == 0 {
            return Err(Error::Codec("a tree has at least one vertex".into()));
        }
        let mut parent = vec![NO_PARENT; n];
        let mut stack: Vec<(u32, u32)> = Vec::new();
        for (i, &d) in degrees.iter().enumerate() {
            if i > 0 {
                let Some(top) = stack.last_mut() else {
                    return Err(Error::Inadmissible);
                };
                parent[i] = top.0;
                top.1 -= 1;
                if top.1 == 0 {
                    stack.pop();
                }
            }
            if d > 0 {
                stack.push((i as u32, d));
            }
        }
        if !stack.is_empty() {
            return Err(Error::Inadmissible);
        }
        Ok(Self::from_preorder_parents_unchecked(parent, n))
    }

    pub fn single() -> Self {
        Self::from_preorder_parents_unchecked(vec![NO_PARENT], 1)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        match self.parent[v] {
            NO_PARENT => None,
            p => Some(p as usize),
        }
    }

    pub fn parents(&self) -> &[u32] {
        &self.parent
    }

    pub fn children(&self, v: usize) -> &[u32] {
        &self.children[self.child_start[v] as usize..self.child_start[v + 1] as usize]
    }

    pub fn outdegree(&self, v: usize) -> usize {
        (self.child_start[v + 1] - self.child_start[v]) as usize
    }

    pub fn outdegrees(&self) -> Vec<u32> {
        (0..self.len()).map(|v| self.outdegree(v) as u32).collect()
    }

    /// Depth of every vertex.
    pub fn depths(&self) -> Vec<u32> {
        let mut d = vec![0u32; self.len()];
        for v in 1..self.len() {
            d[v] = d[self.parent[v] as usize] + 1;
        }
        d
    }

    /// `H(i)`: depth of the i-th vertex in preorder.
    pub fn height_function(&self) -> Vec<u32> {
        self.depths()
    }

    pub fn height(&self) -> u32 {
        self.depths().into_iter().max().unwrap_or(0)
    }

    /// Heights along the contour walk: `2(|t| - 1) + 1` values.
    pub fn contour_function(&self) -> Vec<u32> {
        let n = self.len();
        let depth = self.depths();
        let mut c = Vec::with_capacity(2 * n - 1);
        c.push(0);
        for v in 1..n {
            // climb from the previous vertex up to the parent of v, then step down
            let target = depth[v] - 1;
            let mut h = *c.last().unwrap();
            while h > target {
                h -= 1;
                c.push(h);
            }
            c.push(depth[v]);
        }
        let mut h = *c.last().unwrap();
        while h > 0 {
            h -= 1;
            c.push(h);
        }
        c
    }

    pub fn subtree_sizes(&self) -> Vec<u32> {
        let mut s = vec![1u32; self.len()];
        for v in (1..self.len()).rev() {
            s[self.parent[v] as usize] += s[v];
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contour_and_height_examples() {
        let single = PlaneTree::single();
        assert_eq!(single.contour_function(), vec![0]);
        assert_eq!(single.height_function(), vec![0]);
        let cherry = PlaneTree::from_parents(&[0, 0, 0]).unwrap();
        assert_eq!(cherry.contour_function(), vec![0, 1, 0, 1, 0]);
        assert_eq!(cherry.height_function(), vec![0, 1, 1]);
        let path = PlaneTree::from_parents(&[0, 0, 1]).unwrap();
        assert_eq!(path.contour_function(), vec![0, 1, 2, 1, 0]);
        assert_eq!(path.height_function(), vec![0, 1, 2]);
    }

    #[test]
    fn rejects_non_preorder_arrays() {
        assert!(PlaneTree::from_parents(&[0, 0, 0, 1]).is_err());
        assert!(PlaneTree::from_parents(&[0, 1]).is_err());
        assert!(PlaneTree::from_parents(&[0, 0, 1, 0]).is_ok());
    }

    #[test]
    fn outdegree_round_trip() {
        let t = PlaneTree::from_parents(&[0, 0, 1, 1, 0, 4]).unwrap();
        assert_eq!(t.outdegrees(), vec![2, 2, 0, 0, 1, 0]);
        assert_eq!(PlaneTree::from_outdegrees(&t.outdegrees()).unwrap(), t);
        assert!(PlaneTree::from_outdegrees(&[2, 0]).is_err());
        assert!(PlaneTree::from_outdegrees(&[1, 0, 0]).is_err());
        assert_eq!(t.children(1), &[2, 3]);
        assert_eq!(t.subtree_sizes()[0], 6);
    }
}
