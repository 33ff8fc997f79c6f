//! The size-biased spine tree on flat trees.

use rand::Rng;

use super::blob::{simulate_blob_into, BlobDraw, SizeBiasedBlobSampler};
use super::compiled::CompiledFamily;
use super::rng::SampleBudget;
use crate::error::{Error, Result};
use crate::kernel::OffspringFamily;
use crate::tree::{FlatTree, MarkedFlatTree, MultitypeTree, PlaneTree, NO_PARENT};

/// Ordinary and size-biased flat offspring laws of one family.
#[derive(Clone, Debug)]
pub struct SpineSampler {
    cf: CompiledFamily,
    biased: SizeBiasedBlobSampler,
}

impl SpineSampler {
    pub fn new(family: &OffspringFamily) -> Result<Self> {
        Ok(SpineSampler {
            cf: CompiledFamily::new(family),
            biased: SizeBiasedBlobSampler::new(family)?,
        })
    }

    /// Flat offspring vector of a type-0 vertex: blob member counts by type.
    fn profile<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        biased: bool,
        max_size: usize,
        scratch: &mut Scratch,
    ) -> Result<Vec<u32>> {
        let t = self.cf.num_types();
        let mut c = vec![0u32; t];
        if biased {
            let (b, _) = self.biased.sample(rng, max_size)?;
            for &ty in &b.types[1..] {
                c[ty as usize] += 1;
            }
        } else {
            let out = simulate_blob_into(
                &self.cf,
                rng,
                max_size,
                u32::MAX,
                u64::MAX,
                &mut scratch.types,
                &mut scratch.parents,
                &mut scratch.stack,
            )?;
            debug_assert!(matches!(out, BlobDraw::Done { .. }));
            for &ty in &scratch.types[1..] {
                c[ty as usize] += 1;
            }
        }
        Ok(c)
    }

    /// The flat tree T♭(ℓ): vertices on the spine at heights below `ell`
    /// reproduce by the size-biased flat law and pass the spine to a uniform
    /// type-0 child; every other type-0 vertex, including the mark at height
    /// `ell`, reproduces by the ordinary flat law.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        ell: usize,
        rng: &mut R,
        budget: &SampleBudget,
    ) -> Result<MarkedFlatTree> {
        enum Step {
            /// Type-0 vertex; `level` is its spine height or `None` off the spine.
            Enter(u32, Option<usize>),
            Leaves(Vec<u32>, u32),
        }
        let mut scratch = Scratch::default();
        let mut parent: Vec<u32> = Vec::new();
        let mut types: Vec<u16> = Vec::new();
        let mut spine = Vec::with_capacity(ell + 1);
        let mut mark = 0usize;
        let mut pending = 0usize;
        let mut stack = vec![Step::Enter(NO_PARENT, Some(0))];
        let overflow = || Error::Overflow {
            max_vertices: budget.max_vertices,
        };
        while let Some(step) = stack.pop() {
            match step {
                Step::Enter(p, level) => {
                    if p != NO_PARENT {
                        pending -= 1;
                    }
                    let id = parent.len() as u32;
                    parent.push(p);
                    types.push(0);
                    let biased = level.is_some_and(|h| h < ell);
                    if level.is_some() {
                        spine.push(id as usize);
                        if level == Some(ell) {
                            mark = id as usize;
                        }
                    }
                    let c = self.profile(rng, biased, budget.max_vertices, &mut scratch)?;
                    let members: usize = c.iter().map(|&x| x as usize).sum();
                    pending += members;
                    if parent.len() + pending > budget.max_vertices {
                        return Err(overflow());
                    }
                    let next = if biased {
                        Some(rng.random_range(0..c[0] as usize))
                    } else {
                        None
                    };
                    let leaves = c[1..].to_vec();
                    stack.push(Step::Leaves(leaves, id));
                    for k in (0..c[0] as usize).rev() {
                        let lvl = if next == Some(k) {
                            level.map(|h| h + 1)
                        } else {
                            None
                        };
                        stack.push(Step::Enter(id, lvl));
                    }
                }
                Step::Leaves(counts, id) => {
                    for (j, &k) in counts.iter().enumerate() {
                        pending -= k as usize;
                        for _ in 0..k {
                            parent.push(id);
                            types.push(j as u16 + 1);
                        }
                    }
                }
            }
        }
        let n = parent.len();
        let tree = MultitypeTree::from_parts_unchecked(
            PlaneTree::from_preorder_parents_unchecked(parent, n),
            types,
        );
        Ok(MarkedFlatTree {
            tree: FlatTree::new_unchecked(tree),
            spine,
            mark,
        })
    }
}

#[derive(Default)]
struct Scratch {
    types: Vec<u16>,
    parents: Vec<u32>,
    stack: Vec<(u16, u32)>,
}

pub fn sample_spine_tree<R: Rng + ?Sized>(
    family: &OffspringFamily,
    ell: usize,
    rng: &mut R,
    budget: &SampleBudget,
) -> Result<MarkedFlatTree> {
    SpineSampler::new(family)?.sample(ell, rng, budget)
}
