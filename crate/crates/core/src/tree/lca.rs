//! Lowest common ancestors via an Euler tour and a sparse table.

use super::plane::PlaneTree;

/// O(1) lca and distance queries after O(n log n) preprocessing.
#[derive(Clone, Debug)]
pub struct LcaIndex {
    depth: Vec<u32>,
    first: Vec<u32>,
    /// `table[k][i]`: vertex of minimum depth in `euler[i .. i + 2^k]`.
    table: Vec<Vec<u32>>,
}

impl LcaIndex {
    pub fn new(t: &PlaneTree) -> Self {
        let n = t.len();
        let depth = t.depths();
        let mut euler = Vec::with_capacity(2 * n - 1);
        let mut first = vec![0u32; n];
        // Iterative Euler tour: (vertex, next child slot).
        let mut stack: Vec<(u32, u32)> = vec![(0, 0)];
        first[0] = 0;
        euler.push(0u32);
        while let Some(&mut (v, ref mut slot)) = stack.last_mut() {
            let kids = t.children(v as usize);
            if (*slot as usize) < kids.len() {
                let c = kids[*slot as usize];
                *slot += 1;
                first[c as usize] = euler.len() as u32;
                euler.push(c);
                stack.push((c, 0));
            } else {
                stack.pop();
                if let Some(&(p, _)) = stack.last() {
                    euler.push(p);
                }
            }
        }
        let m = euler.len();
        let mut table = vec![euler];
        let mut k = 1;
        while (1 << k) <= m {
            let prev = &table[k - 1];
            let half = 1 << (k - 1);
            let row: Vec<u32> = (0..=m - (1 << k))
                .map(|i| {
                    let (a, b) = (prev[i], prev[i + half]);
                    if depth[a as usize] <= depth[b as usize] {
                        a
                    } else {
                        b
                    }
                })
                .collect();
            table.push(row);
            k += 1;
        }
        LcaIndex {
            depth,
            first,
            table,
        }
    }

    pub fn lca(&self, u: usize, v: usize) -> usize {
        let (mut a, mut b) = (self.first[u] as usize, self.first[v] as usize);
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        let len = b - a + 1;
        let k = usize::BITS as usize - 1 - len.leading_zeros() as usize;
        let (x, y) = (self.table[k][a], self.table[k][b + 1 - (1 << k)]);
        if self.depth[x as usize] <= self.depth[y as usize] {
            x as usize
        } else {
            y as usize
        }
    }

    /// `d(u, v) = h(u) + h(v) - 2 h(lca(u, v))`.
    pub fn distance(&self, u: usize, v: usize) -> u32 {
        let w = self.lca(u, v);
        self.depth[u] + self.depth[v] - 2 * self.depth[w]
    }

    pub fn depth(&self, v: usize) -> u32 {
        self.depth[v]
    }

    pub fn height(&self) -> u32 {
        self.depth.iter().copied().max().unwrap_or(0)
    }
}
