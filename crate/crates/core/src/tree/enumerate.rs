//! Exhaustive enumeration of small plane and multitype trees.

use super::multitype::MultitypeTree;
use super::plane::PlaneTree;

/// All plane trees with exactly `size` vertices, in lexicographic order of
/// their preorder outdegree sequences.
pub fn plane_trees(size: usize) -> Vec<PlaneTree> {
    fn rec(size: usize, seq: &mut Vec<u32>, open: usize, out: &mut Vec<PlaneTree>) {
        let placed = seq.len();
        if placed == size {
            if open == 0 {
                out.push(PlaneTree::from_outdegrees(seq).expect("valid Lukasiewicz word"));
            }
            return;
        }
        if open == 0 && placed > 0 {
            return;
        }
        let after = size - placed - 1;
        let need = if placed == 0 { 0 } else { open - 1 };
        // open slots after this vertex must be fillable by the remaining ones
        for d in 0..=(after - need.min(after)) {
            let next_open = need + d;
            if next_open > after || (next_open == 0 && after > 0) {
                continue;
            }
            seq.push(d as u32);
            rec(size, seq, next_open, out);
            seq.pop();
        }
    }
    let mut out = Vec::new();
    if size > 0 {
        rec(size, &mut Vec::with_capacity(size), 0, &mut out);
    }
    out
}

/// All multitype trees with `1..=max_vertices` vertices over `num_types`
/// types, with the root type fixed when `root_type` is given.
pub fn multitype_trees(
    max_vertices: usize,
    num_types: usize,
    root_type: Option<u16>,
) -> Vec<MultitypeTree> {
    let mut out = Vec::new();
    for size in 1..=max_vertices {
        for shape in plane_trees(size) {
            let mut types = vec![0u16; size];
            let first = usize::from(root_type.is_some());
            if let Some(r) = root_type {
                types[0] = r;
            }
            loop {
                out.push(MultitypeTree::new(shape.clone(), types.clone()).expect("sizes agree"));
                let mut i = first;
                loop {
                    if i == size {
                        break;
                    }
                    types[i] += 1;
                    if (types[i] as usize) < num_types {
                        break;
                    }
                    types[i] = 0;
                    i += 1;
                }
                if i == size {
                    break;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalan_counts() {
        let counts: Vec<usize> = (1..=8).map(|n| plane_trees(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 14, 42, 132, 429]);
    }

    #[test]
    fn two_type_counts() {
        // Σ_{s ≤ 8} Cat(s-1) 2^(s-1)
        assert_eq!(multitype_trees(8, 2, Some(0)).len(), 64_979);
        assert_eq!(multitype_trees(3, 2, None).len(), 2 + 4 + 16);
    }
}
