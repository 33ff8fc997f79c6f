//! Typed words and finite-support offspring laws.

use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};

/// Ordered child types of one vertex (0-based type indices, birth order).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TypedWord {
    pub symbols: Vec<u16>,
}

impl TypedWord {
    pub fn new(symbols: Vec<u16>) -> Self {
        TypedWord { symbols }
    }

    pub fn empty() -> Self {
        TypedWord::default()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Number of occurrences of each type, `#_j w`.
    pub fn counts(&self, num_types: usize) -> Vec<u32> {
        let mut c = vec![0u32; num_types];
        for &s in &self.symbols {
            c[s as usize] += 1;
        }
        c
    }

    /// The canonical word with nondecreasing types for a count vector.
    pub fn from_counts(counts: &[u32]) -> Self {
        let mut symbols = Vec::with_capacity(counts.iter().map(|&c| c as usize).sum());
        for (t, &c) in counts.iter().enumerate() {
            symbols.extend(std::iter::repeat_n(t as u16, c as usize));
        }
        TypedWord { symbols }
    }
}

/// A probability distribution on typed words with finite support.
#[derive(Clone, Debug, PartialEq)]
pub struct OffspringLaw {
    support: Vec<(TypedWord, f64)>,
    tail_mass_bound: f64,
}

const SUM_TOLERANCE: f64 = 1e-12;

impl OffspringLaw {
    /// Builds a law from an explicit word list. Probabilities must sum to one
    /// within 1e-12; they are renormalised exactly afterwards. Zero-probability
    /// words are dropped.
    pub fn new(support: Vec<(TypedWord, f64)>, num_types: usize) -> Result<Self> {
        let total = check_support(&support, num_types)?;
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidFamily(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self::normalised(support, total, 0.0))
    }

    /// Builds a law from a truncated parametric family whose retained mass is
    /// `1 - tail_mass_bound`. The retained words are renormalised.
    pub fn truncated(
        support: Vec<(TypedWord, f64)>,
        num_types: usize,
        tail_mass_bound: f64,
    ) -> Result<Self> {
        let total = check_support(&support, num_types)?;
        if total < 1.0 - tail_mass_bound - SUM_TOLERANCE || total > 1.0 + SUM_TOLERANCE {
            return Err(Error::InvalidFamily(format!(
                "retained mass {total} is inconsistent with tail bound {tail_mass_bound}"
            )));
        }
        Ok(Self::normalised(support, total, tail_mass_bound))
    }

    fn normalised(support: Vec<(TypedWord, f64)>, total: f64, tail: f64) -> Self {
        // Sums already within rounding of one are kept bit-for-bit so that a
        // written-out law reloads to the same family hash.
        let scale = if (total - 1.0).abs() <= 1e-15 {
            1.0
        } else {
            total
        };
        let support = support
            .into_iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(w, p)| (w, p / scale))
            .collect();
        OffspringLaw {
            support,
            tail_mass_bound: tail,
        }
    }

    pub(crate) fn from_parts_unchecked(support: Vec<(TypedWord, f64)>, tail: f64) -> Self {
        OffspringLaw {
            support,
            tail_mass_bound: tail,
        }
    }

    pub fn support(&self) -> &[(TypedWord, f64)] {
        &self.support
    }

    pub fn tail_mass_bound(&self) -> f64 {
        self.tail_mass_bound
    }

    pub fn prob_of(&self, word: &TypedWord) -> f64 {
        self.support
            .iter()
            .find(|(w, _)| w == word)
            .map_or(0.0, |(_, p)| *p)
    }

    pub fn max_word_len(&self) -> usize {
        self.support.iter().map(|(w, _)| w.len()).max().unwrap_or(0)
    }

    /// Builds a law from a count-vector distribution, expanding each count
    /// vector to its canonical word.
    pub fn from_count_law(
        counts: Vec<(Vec<u32>, f64)>,
        num_types: usize,
        tail_mass_bound: f64,
    ) -> Result<Self> {
        let support: Vec<_> = counts
            .into_iter()
            .map(|(c, p)| {
                if c.len() != num_types {
                    return Err(Error::InvalidFamily(format!(
                        "count vector has length {}, expected {num_types}",
                        c.len()
                    )));
                }
                Ok((TypedWord::from_counts(&c), p))
            })
            .collect::<Result<_>>()?;
        if tail_mass_bound > 0.0 {
            Self::truncated(support, num_types, tail_mass_bound)
        } else {
            Self::new(support, num_types)
        }
    }

    /// Independent Poisson counts per type, truncated so that the dropped mass
    /// is at most `tail_mass`.
    pub fn poisson_product(means: &[f64], tail_mass: f64) -> Result<Self> {
        let marginals = means
            .iter()
            .map(|&m| {
                if !(m.is_finite() && m >= 0.0) {
                    return Err(Error::InvalidFamily(format!("invalid Poisson mean {m}")));
                }
                Ok(move |k: u32| poisson_pmf(m, k))
            })
            .collect::<Result<Vec<_>>>()?;
        product_law(&marginals, tail_mass)
    }

    /// Independent geometric counts per type (support 0, 1, 2, ...) with the
    /// given means, truncated at `tail_mass`.
    pub fn geometric_product(means: &[f64], tail_mass: f64) -> Result<Self> {
        let marginals = means
            .iter()
            .map(|&m| {
                if !(m.is_finite() && m >= 0.0) {
                    return Err(Error::InvalidFamily(format!("invalid geometric mean {m}")));
                }
                let q = m / (1.0 + m);
                Ok(move |k: u32| (1.0 - q) * q.powi(k as i32))
            })
            .collect::<Result<Vec<_>>>()?;
        product_law(&marginals, tail_mass)
    }

    /// Independent binomial counts per type. No truncation is needed.
    pub fn binomial_product(trials: &[u32], probs: &[f64]) -> Result<Self> {
        if trials.len() != probs.len() {
            return Err(Error::InvalidFamily(
                "binomial trials and probs differ in length".into(),
            ));
        }
        let marginals = trials
            .iter()
            .zip(probs)
            .map(|(&t, &p)| {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidFamily(format!("invalid binomial prob {p}")));
                }
                Ok(move |k: u32| binomial_pmf(t, p, k))
            })
            .collect::<Result<Vec<_>>>()?;
        product_law(&marginals, 0.0)
    }
}

fn check_support(support: &[(TypedWord, f64)], num_types: usize) -> Result<f64> {
    let mut seen = HashSet::with_capacity(support.len());
    let mut total = 0.0;
    for (w, p) in support {
        if !(p.is_finite() && *p >= 0.0) {
            return Err(Error::InvalidFamily(format!("invalid probability {p}")));
        }
        if let Some(&s) = w.symbols.iter().find(|&&s| s as usize >= num_types) {
            return Err(Error::InvalidFamily(format!(
                "type {} out of range 1..={num_types}",
                s as usize + 1
            )));
        }
        if !seen.insert(w) {
            return Err(Error::InvalidFamily(format!(
                "duplicate word {:?}",
                w.symbols.iter().map(|s| s + 1).collect::<Vec<_>>()
            )));
        }
        total += p;
    }
    Ok(total)
}

fn ln_factorial(k: u32) -> f64 {
    statrs::function::gamma::ln_gamma(k as f64 + 1.0)
}

fn ln_choose(n: u32, k: u32) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

fn binomial_pmf(t: u32, p: f64, k: u32) -> f64 {
    if k > t {
        return 0.0;
    }
    if p == 0.0 || p == 1.0 {
        let at = if p == 0.0 { 0 } else { t };
        return if k == at { 1.0 } else { 0.0 };
    }
    (ln_choose(t, k) + k as f64 * p.ln() + (t - k) as f64 * (1.0 - p).ln()).exp()
}

fn poisson_pmf(m: f64, k: u32) -> f64 {
    if m == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * m.ln() - m - ln_factorial(k)).exp()
}

/// Product of independent marginals on {0, 1, ...}, each cut where its tail
/// drops below `tail_mass / d`.
fn product_law<F: Fn(u32) -> f64>(marginals: &[F], tail_mass: f64) -> Result<OffspringLaw> {
    let d = marginals.len();
    if d == 0 {
        return Err(Error::InvalidFamily("empty product law".into()));
    }
    let per_coord = if tail_mass > 0.0 {
        tail_mass / d as f64
    } else {
        0.0
    };
    let mut tables: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut kept = 1.0;
    for f in marginals {
        let mut pmf = Vec::new();
        let mut cum = 0.0;
        let mut k = 0u32;
        loop {
            let p = f(k);
            pmf.push(p);
            cum += p;
            if 1.0 - cum <= per_coord || (per_coord == 0.0 && p == 0.0 && cum >= 1.0 - 1e-15) {
                break;
            }
            if k > 100_000 {
                return Err(Error::InvalidFamily(
                    "marginal needs more than 1e5 support points; raise tail_mass".into(),
                ));
            }
            k += 1;
        }
        while pmf.len() > 1 && *pmf.last().unwrap() == 0.0 {
            pmf.pop();
        }
        kept *= cum.min(1.0);
        tables.push(pmf);
    }
    let mut counts: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    let mut idx = vec![0usize; d];
    loop {
        let p: f64 = idx.iter().zip(&tables).map(|(&i, t)| t[i]).product();
        if p > 0.0 {
            counts.insert(idx.iter().map(|&i| i as u32).collect(), p);
        }
        let mut j = 0;
        loop {
            if j == d {
                let support: Vec<_> = counts
                    .into_iter()
                    .map(|(c, p)| (TypedWord::from_counts(&c), p))
                    .collect();
                let total: f64 = support.iter().map(|(_, p)| p).sum();
                return Ok(OffspringLaw::normalised(
                    support,
                    total,
                    (1.0 - kept).max(0.0),
                ));
            }
            idx[j] += 1;
            if idx[j] < tables[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &[u16]) -> TypedWord {
        TypedWord::new(s.to_vec())
    }

    #[test]
    fn canonical_word_from_counts() {
        assert_eq!(TypedWord::from_counts(&[2, 0, 1]).symbols, vec![0, 0, 2]);
        assert_eq!(w(&[1, 0, 1]).counts(3), vec![1, 2, 0]);
    }

    #[test]
    fn rejects_bad_sums_and_duplicates() {
        assert!(OffspringLaw::new(vec![(w(&[]), 0.5), (w(&[0]), 0.4)], 1).is_err());
        assert!(OffspringLaw::new(vec![(w(&[]), 0.5), (w(&[]), 0.5)], 1).is_err());
        assert!(OffspringLaw::new(vec![(w(&[1]), 1.0)], 1).is_err());
        assert!(OffspringLaw::new(vec![(w(&[]), 0.5), (w(&[0, 0]), 0.5)], 1).is_ok());
    }

    #[test]
    fn poisson_product_tail_is_bounded() {
        let law = OffspringLaw::poisson_product(&[1.0, 1.0], 1e-12).unwrap();
        assert!(law.tail_mass_bound() <= 1e-12);
        let total: f64 = law.support().iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-14);
        let p = law.prob_of(&w(&[0, 1]));
        assert!((p / (-2.0f64).exp() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn poisson_zero_mean_is_a_point_mass() {
        let law = OffspringLaw::poisson_product(&[0.0], 1e-12).unwrap();
        assert_eq!(law.support().len(), 1);
        assert!(law.support()[0].0.is_empty());
    }

    #[test]
    fn binomial_product_matches_pmf() {
        let law = OffspringLaw::binomial_product(&[2], &[0.5]).unwrap();
        assert!((law.prob_of(&w(&[0])) - 0.5).abs() < 1e-15);
        assert!((law.prob_of(&w(&[0, 0])) - 0.25).abs() < 1e-15);
        let degenerate = OffspringLaw::binomial_product(&[2], &[1.0]).unwrap();
        assert_eq!(degenerate.support().len(), 1);
    }

    #[test]
    fn geometric_product_mean() {
        let law = OffspringLaw::geometric_product(&[0.5], 1e-14).unwrap();
        let mean: f64 = law.support().iter().map(|(w, p)| w.len() as f64 * p).sum();
        assert!((mean - 0.5).abs() < 1e-10);
    }
}
