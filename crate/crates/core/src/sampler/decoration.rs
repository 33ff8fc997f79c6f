//! Conditional blob laws given a flat tree.

use std::collections::HashMap;

use rand::Rng;

use super::blob::{simulate_blob_into, BlobDraw};
use super::compiled::CompiledFamily;
use super::rng::SampleBudget;
use crate::error::{Error, Result};
use crate::kernel::OffspringFamily;
use crate::tree::{Decoration, FlatTree};

/// Draws, independently for each type-0 vertex of `tau`, a blob whose type
/// profile matches the vertex's children, with probability proportional to
/// its unconditioned probability. Blobs are simulated and kept for whichever
/// pending vertex needs their profile; `budget.max_attempts` bounds the total
/// number of simulations.
pub fn sample_decoration_compiled<R: Rng + ?Sized>(
    tau: &FlatTree,
    cf: &CompiledFamily,
    rng: &mut R,
    budget: &SampleBudget,
) -> Result<Decoration> {
    let t = tau.tree();
    let nt = cf.num_types();
    let roots = tau.type1_vertices();
    let mut profiles: Vec<Vec<u32>> = Vec::with_capacity(roots.len());
    for &v in &roots {
        let mut c = vec![0u32; nt];
        for &ch in t.shape().children(v) {
            let ty = t.type_of(ch as usize);
            if ty >= nt {
                return Err(Error::DecorationMismatch {
                    vertex: v,
                    reason: format!("child type {} outside the family", ty + 1),
                });
            }
            c[ty] += 1;
        }
        profiles.push(c);
    }
    // Pending vertices per profile, served in preorder.
    let mut waiting: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
    for (r, c) in profiles.iter().enumerate().rev() {
        waiting.entry(c.clone()).or_default().push(r);
    }
    let max_frontier = profiles.iter().map(|c| c[0]).max().unwrap_or(0);
    let max_size = profiles
        .iter()
        .map(|c| 1 + c.iter().sum::<u32>() as usize)
        .max()
        .unwrap_or(1);

    let mut chosen: Vec<Option<(Vec<u16>, Vec<u32>)>> = vec![None; roots.len()];
    let mut remaining = roots.len();
    let (mut ty, mut pa, mut stack) = (Vec::new(), Vec::new(), Vec::new());
    let mut prof = vec![0u32; nt];
    let mut draws = 0u64;
    while remaining > 0 {
        if draws >= budget.max_attempts {
            return Err(Error::BudgetExhausted { attempts: draws });
        }
        draws += 1;
        match simulate_blob_into(
            cf,
            rng,
            max_size,
            max_frontier,
            u64::MAX,
            &mut ty,
            &mut pa,
            &mut stack,
        ) {
            Ok(BlobDraw::Done { .. }) => {}
            Ok(BlobDraw::Exceeded) | Err(Error::Overflow { .. }) => continue,
            Err(e) => return Err(e),
        }
        prof.iter_mut().for_each(|x| *x = 0);
        for &s in &ty[1..] {
            prof[s as usize] += 1;
        }
        if let Some(list) = waiting.get_mut(&prof) {
            if let Some(r) = list.pop() {
                chosen[r] = Some((ty.clone(), pa.clone()));
                remaining -= 1;
            }
        }
    }
    let mut deco = Decoration::with_capacity(roots.len(), t.len() + roots.len());
    for c in chosen {
        let (ty, pa) = c.expect("every vertex served");
        deco.push(&ty, &pa);
    }
    Ok(deco)
}

pub fn sample_decoration<R: Rng + ?Sized>(
    tau: &FlatTree,
    family: &OffspringFamily,
    rng: &mut R,
    budget: &SampleBudget,
) -> Result<Decoration> {
    sample_decoration_compiled(tau, &CompiledFamily::new(family), rng, budget)
}
