#![allow(dead_code)]

use std::collections::HashMap;

use bienayme::kernel::{parse_family, OffspringFamily, TypedWord};
use bienayme::tree::codec::to_text;
use bienayme::tree::{MultitypeTree, PlaneTree};
use proptest::prelude::*;

/// Turns an arbitrary degree list into a valid preorder outdegree sequence:
/// cut at the first time the walk dies, or pad with leaves.
pub fn lukasiewicz(raw: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    let mut open = 1i64;
    for &d in raw {
        out.push(d);
        open += d as i64 - 1;
        if open == 0 {
            return out;
        }
    }
    out.extend(std::iter::repeat_n(0, open as usize));
    out
}

/// Random multitype trees rooted at type 0.
pub fn arb_tree(max_raw: usize, num_types: u16) -> impl Strategy<Value = MultitypeTree> {
    (
        prop::collection::vec(0u32..4, 0..max_raw),
        prop::collection::vec(0..num_types, 200),
    )
        .prop_map(|(raw, tys)| {
            let degrees = lukasiewicz(&raw);
            let shape = PlaneTree::from_outdegrees(&degrees).unwrap();
            let n = shape.len();
            let mut types: Vec<u16> = (0..n).map(|i| tys[i % tys.len()]).collect();
            types[0] = 0;
            MultitypeTree::new(shape, types).unwrap()
        })
}

/// `P(T = t)` for the unconditioned tree rooted at `t`'s root type.
pub fn tree_prob(family: &OffspringFamily, t: &MultitypeTree) -> f64 {
    (0..t.len())
        .map(|v| {
            let word = TypedWord::new(
                t.shape()
                    .children(v)
                    .iter()
                    .map(|&c| t.types()[c as usize])
                    .collect(),
            );
            family.prob_of(t.type_of(v), &word)
        })
        .product()
}

pub fn counts_by_key<I: IntoIterator<Item = String>>(keys: I) -> HashMap<String, u64> {
    let mut m = HashMap::new();
    for k in keys {
        *m.entry(k).or_insert(0) += 1;
    }
    m
}

pub fn key(t: &MultitypeTree) -> String {
    to_text(t)
}

/// A two-type family whose blobs with profile (1, 1) have three shapes.
pub fn three_shape_family() -> OffspringFamily {
    parse_family(
        r#"{"K":2,"Kprime":0,"lambda":[1,1],"types":[
            {"kind":"explicit","words":[{"w":[],"p":0.5},{"w":[1,2],"p":0.25},{"w":[2,1],"p":0.125},{"w":[2],"p":0.125}]},
            {"kind":"explicit","words":[{"w":[],"p":0.5},{"w":[1],"p":0.5}]}]}"#,
    )
    .unwrap()
}

/// Exact conditional law of the tree given `#_λ = n`, over all trees with at
/// most `max_vertices` vertices rooted at type 0. Returns (key, probability)
/// and the unconditioned mass the enumeration covers.
pub fn conditioned_law(
    family: &OffspringFamily,
    n: u64,
    max_vertices: usize,
) -> Vec<(String, f64)> {
    let trees =
        bienayme::tree::enumerate::multitype_trees(max_vertices, family.num_types(), Some(0));
    let mut cells: Vec<(String, f64)> = trees
        .iter()
        .filter(|t| t.weighted_size(family.lambda()) == n)
        .map(|t| (key(t), tree_prob(family, t)))
        .filter(|(_, p)| *p > 0.0)
        .collect();
    let total: f64 = cells.iter().map(|c| c.1).sum();
    cells.iter_mut().for_each(|c| c.1 /= total);
    cells
}

/// Chi-square p-value of observed keys against a law, pooling cells whose
/// expected count is below 5 (plus every unlisted key) into one cell.
pub fn gof_p(law: &[(String, f64)], observed: &HashMap<String, u64>) -> f64 {
    let total: u64 = observed.values().sum();
    let mut obs = Vec::new();
    let mut exp = Vec::new();
    let (mut pooled_o, mut pooled_p) = (0u64, 0.0);
    let mut seen = 0u64;
    for (k, p) in law {
        let o = observed.get(k).copied().unwrap_or(0);
        seen += o;
        if p * total as f64 >= 5.0 {
            obs.push(o);
            exp.push(*p);
        } else {
            pooled_o += o;
            pooled_p += p;
        }
    }
    pooled_o += total - seen;
    pooled_p += (1.0 - law.iter().map(|c| c.1).sum::<f64>()).max(0.0);
    if pooled_o > 0 || pooled_p > 0.0 {
        obs.push(pooled_o);
        exp.push(pooled_p);
    }
    bienayme::analysis::stats::chi_square_gof(&obs, &exp).p_value
}
