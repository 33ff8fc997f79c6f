//! Offspring families: one law per type plus the weight vector λ.

use sha2::{Digest, Sha256};

use super::law::{OffspringLaw, TypedWord};
use crate::error::{Error, Result};

/// A (K + K')-type offspring family. Types `0..k` form the critical block and
/// types `k..k+k_prime` the subcritical block; subcritical types may only
/// produce subcritical types.
#[derive(Clone, Debug, PartialEq)]
pub struct OffspringFamily {
    k: usize,
    k_prime: usize,
    laws: Vec<OffspringLaw>,
    lambda: Vec<u64>,
}

impl OffspringFamily {
    /// Checks the structural invariants: law count, type ranges, block form and
    /// a nonzero λ. `lambda` may have length K (padded with zeros) or K + K'.
    pub fn new(
        k: usize,
        k_prime: usize,
        laws: Vec<OffspringLaw>,
        lambda: Vec<u64>,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidFamily("K must be positive".into()));
        }
        let t = k + k_prime;
        if laws.len() != t {
            return Err(Error::InvalidFamily(format!(
                "expected {t} offspring laws, found {}",
                laws.len()
            )));
        }
        for (i, law) in laws.iter().enumerate() {
            for (w, _) in law.support() {
                if w.symbols.iter().any(|&s| s as usize >= t) {
                    return Err(Error::InvalidFamily(format!(
                        "type {} produces a type outside 1..={t}",
                        i + 1
                    )));
                }
                if i >= k && w.symbols.iter().any(|&s| (s as usize) < k) {
                    return Err(Error::InvalidFamily(format!(
                        "subcritical type {} produces a critical-block type",
                        i + 1
                    )));
                }
            }
        }
        let lambda = pad_lambda(lambda, k, k_prime)?;
        Ok(OffspringFamily {
            k,
            k_prime,
            laws,
            lambda,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn k_prime(&self) -> usize {
        self.k_prime
    }

    pub fn num_types(&self) -> usize {
        self.k + self.k_prime
    }

    pub fn laws(&self) -> &[OffspringLaw] {
        &self.laws
    }

    pub fn law(&self, i: usize) -> &OffspringLaw {
        &self.laws[i]
    }

    pub fn lambda(&self) -> &[u64] {
        &self.lambda
    }

    pub fn with_lambda(&self, lambda: Vec<u64>) -> Result<Self> {
        let lambda = pad_lambda(lambda, self.k, self.k_prime)?;
        Ok(OffspringFamily {
            lambda,
            ..self.clone()
        })
    }

    pub(crate) fn with_laws(&self, laws: Vec<OffspringLaw>) -> Self {
        OffspringFamily {
            laws,
            ..self.clone()
        }
    }

    /// The standing non-degeneracy assumptions: some critical type can have
    /// no critical-block children, and some critical type can have two or more
    /// children.
    pub fn check_standing_assumptions(&self) -> Result<()> {
        let k = self.k;
        let can_stop = self.laws[..k].iter().any(|law| {
            law.support()
                .iter()
                .any(|(w, p)| *p > 0.0 && w.symbols.iter().all(|&s| s as usize >= k))
        });
        if !can_stop {
            return Err(Error::InvalidFamily(
                "no critical type can have zero critical-block children".into(),
            ));
        }
        let branches = self.laws[..k]
            .iter()
            .any(|law| law.support().iter().any(|(w, p)| *p > 0.0 && w.len() >= 2));
        if !branches {
            return Err(Error::InvalidFamily(
                "no critical type can have two or more children".into(),
            ));
        }
        Ok(())
    }

    /// Hex SHA-256 over a canonical byte encoding of the materialised family.
    pub fn hash_hex(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.k as u64).to_le_bytes());
        h.update((self.k_prime as u64).to_le_bytes());
        for &l in &self.lambda {
            h.update(l.to_le_bytes());
        }
        for law in &self.laws {
            h.update((law.support().len() as u64).to_le_bytes());
            for (w, p) in law.support() {
                h.update((w.len() as u64).to_le_bytes());
                for &s in &w.symbols {
                    h.update(s.to_le_bytes());
                }
                h.update(p.to_bits().to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    /// Largest number of children any word can have.
    pub fn max_word_len(&self) -> usize {
        self.laws
            .iter()
            .map(|l| l.max_word_len())
            .max()
            .unwrap_or(0)
    }

    pub fn prob_of(&self, parent_type: usize, word: &TypedWord) -> f64 {
        self.laws[parent_type].prob_of(word)
    }
}

fn pad_lambda(mut lambda: Vec<u64>, k: usize, k_prime: usize) -> Result<Vec<u64>> {
    let t = k + k_prime;
    if lambda.len() == k && k_prime > 0 {
        lambda.resize(t, 0);
    }
    if lambda.len() != t {
        return Err(Error::InvalidFamily(format!(
            "lambda has length {}, expected {k} or {t}",
            lambda.len()
        )));
    }
    if lambda.iter().all(|&l| l == 0) {
        return Err(Error::InvalidFamily(
            "lambda must not be the zero vector".into(),
        ));
    }
    Ok(lambda)
}
