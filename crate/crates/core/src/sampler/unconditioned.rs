//! Unconditioned Bienaymé trees.

use rand::Rng;

use super::compiled::CompiledFamily;
use super::rng::SampleBudget;
use crate::error::{Error, Result};
use crate::tree::{MultitypeTree, PlaneTree, NO_PARENT};

/// Grows a tree in DFS order from a root of `root_type`. Returns `Overflow`
/// as soon as the created plus pending vertices exceed the budget; overflow is
/// never retried here.
pub fn sample_unconditioned<R: Rng + ?Sized>(
    cf: &CompiledFamily,
    root_type: usize,
    rng: &mut R,
    budget: &SampleBudget,
) -> Result<MultitypeTree> {
    let mut parent: Vec<u32> = Vec::new();
    let mut types: Vec<u16> = Vec::new();
    let mut stack: Vec<(u16, u32)> = vec![(root_type as u16, NO_PARENT)];
    while let Some((ty, p)) = stack.pop() {
        let id = parent.len() as u32;
        parent.push(p);
        types.push(ty);
        let w = cf.sample_word(ty as usize, rng);
        if parent.len() + stack.len() + w.len() > budget.max_vertices {
            return Err(Error::Overflow {
                max_vertices: budget.max_vertices,
            });
        }
        for &s in w.iter().rev() {
            stack.push((s, id));
        }
    }
    let n = parent.len();
    Ok(MultitypeTree::from_parts_unchecked(
        PlaneTree::from_preorder_parents_unchecked(parent, n),
        types,
    ))
}
