mod common;

use bienayme::tree::codec::{from_text, read_binary, to_text, write_binary};
use bienayme::tree::enumerate::{multitype_trees, plane_trees};
use bienayme::tree::{blow_up, flatten, reduce, LcaIndex, MultitypeTree};
use common::arb_tree;
use proptest::prelude::*;

#[test]
fn catalan_counts() {
    let counts: Vec<usize> = (1..=8).map(|n| plane_trees(n).len()).collect();
    assert_eq!(counts, vec![1, 1, 2, 5, 14, 42, 132, 429]);
}

#[test]
fn exhaustive_two_type_round_trips() {
    let trees = multitype_trees(8, 2, Some(0));
    assert!(trees.len() > 10_000);
    for t in &trees {
        let (flat, deco) = flatten(t).unwrap();
        assert_eq!(flat.tree().type_counts(2), t.type_counts(2));
        assert_eq!(reduce(flat.tree()).unwrap(), reduce(t).unwrap());
        assert_eq!(&blow_up(&flat, &deco).unwrap().0, t);
    }
}

proptest! {
    #[test]
    fn flatten_blow_up_round_trip(t in arb_tree(60, 3)) {
        let (flat, deco) = flatten(&t).unwrap();
        prop_assert_eq!(flat.tree().type_counts(3), t.type_counts(3));
        prop_assert_eq!(reduce(flat.tree()).unwrap(), reduce(&t).unwrap());
        let (back, _) = blow_up(&flat, &deco).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn reduced_tree_counts_type0(t in arb_tree(60, 3)) {
        let r = reduce(&t).unwrap();
        prop_assert_eq!(r.len() as u64, t.type_counts(3)[0]);
    }

    #[test]
    fn text_and_binary_codecs_round_trip(t in arb_tree(80, 4)) {
        prop_assert_eq!(from_text(&to_text(&t)).unwrap(), t.clone());
        let mut buf = Vec::new();
        write_binary(&mut buf, &t).unwrap();
        let back = read_binary(&mut buf.as_slice()).unwrap().unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn contour_walk_shape(t in arb_tree(80, 1)) {
        let s = t.shape();
        let c = s.contour_function();
        prop_assert_eq!(c.len(), 2 * s.len() - 1);
        prop_assert_eq!(c[0], 0);
        prop_assert_eq!(*c.last().unwrap(), 0);
        prop_assert!(c.windows(2).all(|w| w[0].abs_diff(w[1]) == 1));
        prop_assert_eq!(c.iter().copied().max().unwrap(), s.height());
    }

    #[test]
    fn lca_distances_match_depths(t in arb_tree(50, 1)) {
        let s = t.shape();
        let lca = LcaIndex::new(s);
        let depth = s.depths();
        for v in 0..s.len() {
            prop_assert_eq!(lca.distance(0, v), depth[v]);
            if let Some(p) = s.parent(v) {
                prop_assert_eq!(lca.lca(p, v), p);
                prop_assert_eq!(lca.distance(p, v), 1);
            }
        }
    }
}

#[test]
fn single_vertex_round_trip() {
    let t = MultitypeTree::monotype(bienayme::tree::PlaneTree::single());
    let (flat, deco) = flatten(&t).unwrap();
    assert_eq!(blow_up(&flat, &deco).unwrap().0, t);
}
