//! Offspring laws compiled into alias tables for fast word draws.

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use crate::kernel::OffspringFamily;

#[derive(Clone, Debug)]
struct CompiledLaw {
    alias: Option<WeightedAliasIndex<f64>>,
    offsets: Vec<u32>,
    symbols: Vec<u16>,
}

/// Read-only sampling tables for a family; cheap to share across threads.
#[derive(Clone, Debug)]
pub struct CompiledFamily {
    family: OffspringFamily,
    laws: Vec<CompiledLaw>,
}

impl CompiledFamily {
    pub fn new(family: &OffspringFamily) -> Self {
        let laws = family
            .laws()
            .iter()
            .map(|law| {
                let mut offsets = vec![0u32];
                let mut symbols = Vec::new();
                let mut weights = Vec::new();
                for (w, p) in law.support() {
                    symbols.extend_from_slice(&w.symbols);
                    offsets.push(symbols.len() as u32);
                    weights.push(*p);
                }
                let alias = if weights.len() > 1 {
                    Some(WeightedAliasIndex::new(weights).expect("validated weights"))
                } else {
                    None
                };
                CompiledLaw {
                    alias,
                    offsets,
                    symbols,
                }
            })
            .collect();
        CompiledFamily {
            family: family.clone(),
            laws,
        }
    }

    pub fn family(&self) -> &OffspringFamily {
        &self.family
    }

    pub fn num_types(&self) -> usize {
        self.family.num_types()
    }

    pub fn lambda(&self) -> &[u64] {
        self.family.lambda()
    }

    /// Index of a random word of `parent_type`'s law.
    #[inline]
    pub fn sample_index<R: Rng + ?Sized>(&self, parent_type: usize, rng: &mut R) -> usize {
        match &self.laws[parent_type].alias {
            Some(a) => a.sample(rng),
            None => 0,
        }
    }

    #[inline]
    pub fn word(&self, parent_type: usize, index: usize) -> &[u16] {
        let law = &self.laws[parent_type];
        &law.symbols[law.offsets[index] as usize..law.offsets[index + 1] as usize]
    }

    #[inline]
    pub fn sample_word<R: Rng + ?Sized>(&self, parent_type: usize, rng: &mut R) -> &[u16] {
        let i = self.sample_index(parent_type, rng);
        self.word(parent_type, i)
    }
}
