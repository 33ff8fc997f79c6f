//! Conditioning by rejection with early abort.

use rand::Rng;

use super::compiled::CompiledFamily;
use super::rng::SampleBudget;
use crate::analysis::feasible::is_feasible;
use crate::error::{Error, Result};
use crate::kernel::OffspringFamily;
use crate::tree::{MultitypeTree, PlaneTree, NO_PARENT};

/// Sizes up to which feasibility is settled before sampling.
const FEASIBILITY_PRECHECK: u64 = 4096;

enum Attempt {
    Hit(MultitypeTree),
    Miss,
}

/// Grows one tree and gives up as soon as `over(counts)` reports that the
/// created plus pending vertices already overshoot the target.
fn attempt<R: Rng + ?Sized>(
    cf: &CompiledFamily,
    rng: &mut R,
    max_vertices: usize,
    charge: &[u64],
    limits: &[u64],
    exact: &[u64],
    buf: &mut (Vec<u32>, Vec<u16>, Vec<(u16, u32)>),
) -> Attempt {
    let (parent, types, stack) = buf;
    parent.clear();
    types.clear();
    stack.clear();
    // Running created + pending totals per tracked coordinate.
    let mut acc = vec![0u64; limits.len()];
    let track = |acc: &mut [u64], ty: u16| -> bool {
        let base = ty as usize * limits.len();
        let mut ok = true;
        for (i, a) in acc.iter_mut().enumerate() {
            *a += charge[base + i];
            ok &= *a <= limits[i];
        }
        ok
    };
    if !track(&mut acc, 0) {
        return Attempt::Miss;
    }
    stack.push((0, NO_PARENT));
    while let Some((ty, p)) = stack.pop() {
        let id = parent.len() as u32;
        parent.push(p);
        types.push(ty);
        let w = cf.sample_word(ty as usize, rng);
        if parent.len() + stack.len() + w.len() > max_vertices {
            return Attempt::Miss;
        }
        for &s in w.iter().rev() {
            if !track(&mut acc, s) {
                return Attempt::Miss;
            }
            stack.push((s, id));
        }
    }
    if acc != exact {
        return Attempt::Miss;
    }
    let n = parent.len();
    Attempt::Hit(MultitypeTree::from_parts_unchecked(
        PlaneTree::from_preorder_parents_unchecked(std::mem::take(parent), n),
        std::mem::take(types),
    ))
}

fn run<R: Rng + ?Sized>(
    cf: &CompiledFamily,
    rng: &mut R,
    budget: &SampleBudget,
    charge: &[u64],
    targets: &[u64],
) -> Result<(MultitypeTree, u64)> {
    let mut buf = (Vec::new(), Vec::new(), Vec::new());
    for a in 1..=budget.max_attempts {
        if let Attempt::Hit(t) = attempt(
            cf,
            rng,
            budget.max_vertices,
            charge,
            targets,
            targets,
            &mut buf,
        ) {
            return Ok((t, a));
        }
    }
    Err(Error::BudgetExhausted {
        attempts: budget.max_attempts,
    })
}

/// A tree rooted at type 0 conditioned on `#_λ = n`, with the number of
/// attempts used.
pub fn sample_conditioned_rejection_counted<R: Rng + ?Sized>(
    cf: &CompiledFamily,
    n: u64,
    rng: &mut R,
    budget: &SampleBudget,
) -> Result<(MultitypeTree, u64)> {
    let family = cf.family();
    if n <= FEASIBILITY_PRECHECK && !is_feasible(family, n) {
        return Err(Error::Infeasible { n });
    }
    let charge: Vec<u64> = family.lambda().to_vec();
    match run(cf, rng, budget, &charge, &[n]) {
        Err(Error::BudgetExhausted { .. }) if !is_feasible(family, n) => {
            Err(Error::Infeasible { n })
        }
        r => r,
    }
}

pub fn sample_conditioned_rejection<R: Rng + ?Sized>(
    family: &OffspringFamily,
    n: u64,
    rng: &mut R,
    budget: &SampleBudget,
) -> Result<MultitypeTree> {
    let cf = CompiledFamily::new(family);
    sample_conditioned_rejection_counted(&cf, n, rng, budget).map(|(t, _)| t)
}

/// A tree rooted at type 0 conditioned on the counts of the types in `types`
/// being `targets`, with the number of attempts used.
pub fn sample_by_type_counted<R: Rng + ?Sized>(
    cf: &CompiledFamily,
    types: &[usize],
    targets: &[u64],
    rng: &mut R,
    budget: &SampleBudget,
) -> Result<(MultitypeTree, u64)> {
    let t = cf.num_types();
    if types.len() != targets.len() || types.is_empty() || types.iter().any(|&i| i >= t) {
        return Err(Error::InvalidFamily(format!(
            "type subset {types:?} and targets {targets:?} do not match {t} types"
        )));
    }
    let mut charge = vec![0u64; t * types.len()];
    for (i, &ty) in types.iter().enumerate() {
        charge[ty * types.len() + i] += 1;
    }
    run(cf, rng, budget, &charge, targets)
}

pub fn sample_by_type<R: Rng + ?Sized>(
    family: &OffspringFamily,
    types: &[usize],
    targets: &[u64],
    rng: &mut R,
    budget: &SampleBudget,
) -> Result<MultitypeTree> {
    let cf = CompiledFamily::new(family);
    sample_by_type_counted(&cf, types, targets, rng, budget).map(|(t, _)| t)
}
