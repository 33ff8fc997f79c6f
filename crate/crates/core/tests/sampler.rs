mod common;

use std::collections::HashMap;

use bienayme::analysis::is_feasible;
use bienayme::analysis::stats::{chi_square_gof, tv_distance};
use bienayme::exec::Executor;
use bienayme::kernel::{preset, tilt, OffspringFamily, TiltParams};
use bienayme::sampler::*;
use bienayme::tree::enumerate::{multitype_trees, plane_trees};
use bienayme::tree::{blow_up, flatten, DegreeSequence, MultitypeTree};
use bienayme::Error;
use common::{conditioned_law, counts_by_key, gof_p, key, three_shape_family, tree_prob};
use proptest::prelude::*;

fn budget() -> SampleBudget {
    SampleBudget::default()
}

#[test]
fn unconditioned_binary_small_sizes() {
    let cf = CompiledFamily::new(&preset("monotype_binary").unwrap());
    let reps = 100_000u64;
    let sizes: Vec<usize> = (0..reps)
        .map(
            |i| match sample_unconditioned(&cf, 0, &mut RngStream::new(11, i).rng(), &budget()) {
                Ok(t) => t.len(),
                Err(Error::Overflow { .. }) => usize::MAX,
                Err(e) => panic!("{e}"),
            },
        )
        .collect();
    for (size, p) in [(1usize, 0.5), (3, 0.125)] {
        let f = sizes.iter().filter(|&&s| s == size).count() as f64 / reps as f64;
        let se = (p * (1.0 - p) / reps as f64).sqrt();
        assert!((f - p).abs() < 4.0 * se, "P(|T|={size}) = {f}");
    }
}

#[test]
fn unconditioned_overflow_is_reported() {
    let cf = CompiledFamily::new(&preset("monotype_binary").unwrap());
    let tight = SampleBudget::new(5, 1);
    let mut overflowed = 0;
    for i in 0..1000 {
        match sample_unconditioned(&cf, 0, &mut RngStream::new(3, i).rng(), &tight) {
            Ok(t) => assert!(t.len() <= 5),
            Err(Error::Overflow { max_vertices }) => {
                assert_eq!(max_vertices, 5);
                overflowed += 1;
            }
            Err(e) => panic!("{e}"),
        }
    }
    assert!(overflowed > 100);
}

#[test]
fn reducible_family_from_subcritical_root() {
    let cf = CompiledFamily::new(&preset("poisson_reducible").unwrap());
    for i in 0..200 {
        let t = sample_unconditioned(&cf, 1, &mut RngStream::new(5, i).rng(), &budget()).unwrap();
        assert!(t.types().iter().all(|&ty| ty == 1));
    }
}

#[test]
fn rejection_small_cases() {
    let fam = preset("monotype_binary").unwrap();
    let mut rng = RngStream::new(1, 0).rng();
    for _ in 0..20 {
        let t = sample_conditioned_rejection(&fam, 3, &mut rng, &budget()).unwrap();
        assert_eq!(t.shape().outdegrees(), vec![2, 0, 0]);
    }
    let single = sample_conditioned_rejection(&fam, 1, &mut rng, &budget()).unwrap();
    assert_eq!(single.len(), 1);
    let err = sample_conditioned_rejection(&fam, 2, &mut rng, &budget()).unwrap_err();
    assert!(matches!(err, Error::Infeasible { n: 2 }));
}

#[test]
fn exact_binary_five_is_uniform() {
    let fam = preset("monotype_binary").unwrap();
    let s = ExactSampler::new(&fam, 5).unwrap();
    let counts = counts_by_key(
        (0..20_000).map(|i| key(&s.sample(&mut RngStream::new(2, i).rng()).unwrap())),
    );
    assert_eq!(counts.len(), 2);
    let obs: Vec<u64> = counts.values().copied().collect();
    assert!(chi_square_gof(&obs, &[0.5, 0.5]).p_value > 1e-3);
}

fn check_against_enumeration(name: &str, family: &OffspringFamily, n: u64, reps: u64) {
    let law = conditioned_law(family, n, n as usize);
    let exact = ExactSampler::new(family, n).unwrap();
    let cf = CompiledFamily::new(family);
    let ex = counts_by_key(
        (0..reps).map(|i| key(&exact.sample(&mut RngStream::new(21, i).rng()).unwrap())),
    );
    let rj = counts_by_key((0..reps).map(|i| {
        let (t, _) = sample_conditioned_rejection_counted(
            &cf,
            n,
            &mut RngStream::new(22, i).rng(),
            &budget(),
        )
        .unwrap();
        key(&t)
    }));
    let (pe, pr) = (gof_p(&law, &ex), gof_p(&law, &rj));
    assert!(pe > 1e-4, "{name} n={n}: exact p={pe}");
    assert!(pr > 1e-4, "{name} n={n}: rejection p={pr}");
}

#[test]
fn exact_and_rejection_match_enumeration() {
    for name in ["monotype_binary", "two_type"] {
        let fam = preset(name).unwrap();
        for n in 1..=8u64 {
            if is_feasible(&fam, n) {
                check_against_enumeration(name, &fam, n, 20_000);
            } else {
                assert!(
                    matches!(
                        ExactSampler::new(&fam, n).map(|_| ()),
                        Err(Error::Infeasible { .. })
                    ) || {
                        let s = ExactSampler::new(&fam, n).unwrap();
                        matches!(
                            s.sample(&mut RngStream::new(0, 0).rng()),
                            Err(Error::Infeasible { .. })
                        )
                    }
                );
            }
        }
    }
}

#[test]
fn reducible_family_matches_enumeration() {
    let fam = preset("poisson_reducible").unwrap();
    for n in [4u64, 6] {
        check_against_enumeration("poisson_reducible", &fam, n, 20_000);
    }
}

#[test]
fn blob_methods_agree() {
    let fam = preset("poisson_reducible").unwrap();
    let n = 6;
    let law = conditioned_law(&fam, n, n as usize);
    let opts = ExactOptions {
        blob_method: BlobMethod::Rejection,
        ..ExactOptions::default()
    };
    let s = ExactSampler::with_options(&fam, n, opts).unwrap();
    let counts = counts_by_key(
        (0..20_000).map(|i| key(&s.sample(&mut RngStream::new(31, i).rng()).unwrap())),
    );
    assert!(gof_p(&law, &counts) > 1e-4);
}

#[test]
fn localized_sizes_are_infeasible_off_lattice() {
    let fam = preset("localized").unwrap();
    let cf = CompiledFamily::new(&fam);
    let err =
        sample_conditioned_rejection_counted(&cf, 2000, &mut RngStream::new(0, 0).rng(), &budget())
            .unwrap_err();
    assert!(matches!(err, Error::Infeasible { n: 2000 }));
}

#[test]
fn degree_sequence_uniformity() {
    let k = DegreeSequence::monotype(&[2, 1, 0, 0]);
    let trees: Vec<_> = plane_trees(4)
        .into_iter()
        .filter(|t| {
            let mut d = t.outdegrees();
            d.sort();
            d == vec![0, 0, 1, 2]
        })
        .collect();
    assert_eq!(trees.len(), 3);
    let mut counts = [0u64; 3];
    let mut rng = RngStream::new(9, 0).rng();
    for _ in 0..30_000 {
        let t = sample_degree_sequence_tree(&k, &mut rng).unwrap();
        counts[trees.iter().position(|s| *s == t).unwrap()] += 1;
    }
    assert!(chi_square_gof(&counts, &[1.0 / 3.0; 3]).p_value > 1e-3);
}

#[test]
fn degree_sequence_singletons() {
    let mut rng = RngStream::new(0, 0).rng();
    assert_eq!(
        sample_degree_sequence_tree(&DegreeSequence::monotype(&[0]), &mut rng)
            .unwrap()
            .len(),
        1
    );
    let cherry =
        sample_degree_sequence_tree(&DegreeSequence::monotype(&[0, 2, 0]), &mut rng).unwrap();
    assert_eq!(cherry.outdegrees(), vec![2, 0, 0]);
    assert!(matches!(
        sample_degree_sequence_tree(&DegreeSequence::monotype(&[2, 0]), &mut rng),
        Err(Error::Inadmissible)
    ));
}

proptest! {
    #[test]
    fn one_rotation_per_admissible_list(raw in prop::collection::vec(0u32..5, 0..60), seed in any::<u64>()) {
        let degrees = common::lukasiewicz(&raw);
        let mut rng = RngStream::new(seed, 0).rng();
        let mut shuffled = degrees.clone();
        rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), &mut rng);
        let valid = valid_rotations(&shuffled);
        prop_assert_eq!(valid.len(), 1);
        prop_assert_eq!(valid[0], rotation_index(&shuffled));
        let t = sample_degree_sequence_tree(&DegreeSequence::monotype(&degrees), &mut rng).unwrap();
        let (mut a, mut b) = (t.outdegrees(), degrees.clone());
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn conditioned_samples_hit_n(seed in any::<u64>(), pick in 0usize..4) {
        let (name, n) = [("monotype_binary", 301u64), ("two_type", 250), ("poisson_reducible", 120), ("monotype_ternary", 200)][pick];
        let fam = preset(name).unwrap();
        let s = ExactSampler::new(&fam, n).unwrap();
        let parts = s.sample_parts(&mut RngStream::new(seed, 0).rng()).unwrap();
        let t = s.assemble(&parts);
        prop_assert_eq!(t.weighted_size(fam.lambda()), n);
        let (flat, deco) = s.flat_parts(&parts);
        prop_assert_eq!(blow_up(&flat, &deco).unwrap().0, t);
    }
}

#[test]
fn streams_are_reproducible() {
    let fam = preset("two_type").unwrap();
    let s = ExactSampler::new(&fam, 500).unwrap();
    let a = s.sample(&mut RngStream::new(42, 7).rng()).unwrap();
    let b = s.sample(&mut RngStream::new(42, 7).rng()).unwrap();
    let c = s.sample(&mut RngStream::new(42, 8).rng()).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn batches_do_not_depend_on_thread_count() {
    let fam = preset("two_type").unwrap();
    let req = BatchRequest {
        method: Method::Exact,
        n: Some(200),
        types: vec![],
        targets: vec![],
        replicates: 40,
        seed: 5,
        first_stream: 0,
        budget: budget(),
    };
    let seq = run_batch(&fam, &req, &Executor::sequential())
        .unwrap()
        .into_trees();
    let par = run_batch(&fam, &req, &Executor::with_threads(3).unwrap())
        .unwrap()
        .into_trees();
    assert_eq!(seq, par);
}

#[test]
fn by_type_hard_constraints() {
    let bin = preset("monotype_binary").unwrap();
    let mut rng = RngStream::new(4, 0).rng();
    let t = sample_by_type(&bin, &[0], &[3], &mut rng, &budget()).unwrap();
    assert_eq!(t.shape().outdegrees(), vec![2, 0, 0]);
    let fam = preset("two_type").unwrap();
    for _ in 0..100 {
        let t = sample_by_type(&fam, &[1], &[0], &mut rng, &budget()).unwrap();
        assert!(t.types().iter().all(|&ty| ty == 0));
    }
}

#[test]
fn by_type_law_is_tilt_invariant() {
    let fam = preset("two_type").unwrap();
    let tilted = tilt(
        &fam,
        &TiltParams {
            theta: vec![0.4, -0.7],
        },
    )
    .unwrap();
    let (types, targets) = ([0usize, 1], [5u64, 2]);
    let reps = 20_000;
    let draw = |f: &OffspringFamily, seed: u64| {
        let cf = CompiledFamily::new(f);
        counts_by_key((0..reps).map(|i| {
            key(&sample_by_type_counted(
                &cf,
                &types,
                &targets,
                &mut RngStream::new(seed, i).rng(),
                &budget(),
            )
            .unwrap()
            .0)
        }))
    };
    let (a, b) = (draw(&fam, 1), draw(&tilted, 2));
    let keys: Vec<&String> = a
        .keys()
        .chain(b.keys())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let ca: Vec<u64> = keys
        .iter()
        .map(|k| a.get(*k).copied().unwrap_or(0))
        .collect();
    let cb: Vec<u64> = keys
        .iter()
        .map(|k| b.get(*k).copied().unwrap_or(0))
        .collect();
    assert!(tv_distance(&ca, &cb) < 0.03);
}

#[test]
fn decoration_matches_blob_law() {
    let fam = three_shape_family();
    // root(type 0) with one type-0 and one type-1 child: profile (1, 1)
    let source = MultitypeTree::from_parents(&[u32::MAX, 0, 0], vec![0, 0, 1]).unwrap();
    let (tau, _) = flatten(&source).unwrap();
    let cf = CompiledFamily::new(&fam);
    let mut rng = RngStream::new(8, 0).rng();
    let mut counts: HashMap<String, u64> = HashMap::new();
    for _ in 0..30_000 {
        let deco = sample_decoration_compiled(&tau, &cf, &mut rng, &budget()).unwrap();
        let (t, _) = blow_up(&tau, &deco).unwrap();
        *counts.entry(key(&t)).or_default() += 1;
    }
    // the three shapes, weighted by their unconditioned probabilities
    let shapes: Vec<MultitypeTree> = multitype_trees(3, 2, Some(0))
        .into_iter()
        .filter(|t| t.type_counts(2) == vec![2, 1] && tree_prob(&fam, t) > 0.0)
        .collect();
    assert_eq!(shapes.len(), 3);
    let weights: Vec<f64> = shapes.iter().map(|t| tree_prob(&fam, t)).collect();
    let total: f64 = weights.iter().sum();
    let law: Vec<(String, f64)> = shapes
        .iter()
        .zip(&weights)
        .map(|(t, w)| (key(t), w / total))
        .collect();
    assert_eq!(counts.len(), 3);
    assert!(gof_p(&law, &counts) > 1e-3);
}

#[test]
fn monotype_decorations_are_stars() {
    let fam = preset("monotype_binary").unwrap();
    let s = ExactSampler::new(&fam, 51).unwrap();
    let t = s.sample(&mut RngStream::new(1, 1).rng()).unwrap();
    let (tau, _) = flatten(&t).unwrap();
    let deco = sample_decoration(&tau, &fam, &mut RngStream::new(1, 2).rng(), &budget()).unwrap();
    assert_eq!(blow_up(&tau, &deco).unwrap().0, t);
}

fn type0_path_length(m: &bienayme::tree::MarkedFlatTree) -> usize {
    let t = m.tree.tree();
    let mut v = Some(m.mark);
    let mut count = 0;
    while let Some(u) = v {
        count += usize::from(t.types()[u] == 0);
        v = t.shape().parent(u);
    }
    count
}

#[test]
fn spine_length() {
    let fam = preset("two_type").unwrap();
    let s = SpineSampler::new(&fam).unwrap();
    for ell in [0usize, 1, 5, 40] {
        for i in 0..50 {
            match s.sample(ell, &mut RngStream::new(6, i).rng(), &budget()) {
                Ok(m) => {
                    assert_eq!(type0_path_length(&m), ell + 1);
                    assert_eq!(m.tree.tree().types()[m.mark], 0);
                }
                Err(Error::Overflow { .. }) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }
}

/// Marked flat trees from the spine sampler at height `ell` against
/// `P(T♭ = τ)` for every small τ and every type-0 vertex at depth `ell`.
fn check_unmarked_law(name: &str, ell: usize) {
    let fam = preset(name).unwrap();
    let max = 5;
    let mut flat_law: HashMap<MultitypeTree, f64> = HashMap::new();
    for t in multitype_trees(max, fam.num_types(), Some(0)) {
        let p = tree_prob(&fam, &t);
        if p > 0.0 {
            *flat_law
                .entry(flatten(&t).unwrap().0.into_tree())
                .or_default() += p;
        }
    }
    let mut law = Vec::new();
    for (tau, p) in &flat_law {
        let depth = tau.shape().depths();
        for v in 0..tau.len() {
            if tau.types()[v] == 0 && depth[v] as usize == ell {
                law.push((format!("{} @{v}", key(tau)), *p));
            }
        }
    }
    let s = SpineSampler::new(&fam).unwrap();
    let small = SampleBudget::new(max, 1);
    let reps = 100_000;
    let mut counts: HashMap<String, u64> = HashMap::new();
    for i in 0..reps {
        let k = match s.sample(ell, &mut RngStream::new(71, i).rng(), &small) {
            Ok(m) => format!("{} @{}", key(m.tree.tree()), m.mark),
            Err(Error::Overflow { .. }) => "overflow".into(),
            Err(e) => panic!("{e}"),
        };
        *counts.entry(k).or_default() += 1;
    }
    let covered: f64 = law.iter().map(|c| c.1).sum();
    assert!(covered < 1.0);
    assert!(gof_p(&law, &counts) > 1e-4, "{name} ell={ell}");
}

#[test]
fn spine_unmark_identity() {
    for name in ["monotype_binary", "two_type"] {
        for ell in [0, 1] {
            check_unmarked_law(name, ell);
        }
    }
}
