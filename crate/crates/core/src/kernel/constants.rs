//! Projection, second-moment matrices and the scaling constants.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::family::OffspringFamily;
use super::spectral::{classify_family, perron_vectors, PerronVectors, SpectralProfile};
use crate::error::Result;

/// Per-type law of the child count vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedLaw {
    pub per_type: Vec<BTreeMap<Vec<u32>, f64>>,
}

pub fn projection(family: &OffspringFamily) -> ProjectedLaw {
    let t = family.num_types();
    let per_type = family
        .laws()
        .iter()
        .map(|law| {
            let mut m = BTreeMap::new();
            for (w, p) in law.support() {
                *m.entry(w.counts(t)).or_insert(0.0) += p;
            }
            m
        })
        .collect();
    ProjectedLaw { per_type }
}

/// `Q^(i)_jj = E[z_j (z_j - 1)]`, `Q^(i)_jk = E[z_j z_k]` for `i, j, k < K`.
pub fn q_matrices(mu: &ProjectedLaw, k: usize) -> Vec<DMatrix<f64>> {
    mu.per_type[..k]
        .iter()
        .map(|law| {
            let mut q = DMatrix::zeros(k, k);
            for (z, p) in law {
                for j in 0..k {
                    let zj = z[j] as f64;
                    for l in 0..k {
                        let zl = z[l] as f64;
                        q[(j, l)] += p * if j == l { zj * (zj - 1.0) } else { zj * zl };
                    }
                }
            }
            q
        })
        .collect()
}

/// `σ² = Σ a_i b_j b_k Q^(i)_jk` over the critical block.
pub fn sigma2(a: &DVector<f64>, b: &DVector<f64>, q: &[DMatrix<f64>]) -> f64 {
    q.iter()
        .enumerate()
        .map(|(i, qi)| a[i] * (qi * b).dot(b))
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalingMode {
    /// `(σ/2) sqrt(Σ_i λ_i a_i)` over all K + K' types.
    LinearCombination,
    /// `σ/2`, for conditioning on type counts.
    ByType,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlattenedMoments {
    /// `E[ξ̃_i] = a_i / a_1` for every type.
    pub means: Vec<f64>,
    /// `c_1 = Σ λ_i E[ξ̃_i]`.
    pub c1: f64,
}

/// Every spectral quantity of a critical family in one place.
#[derive(Clone, Debug)]
pub struct FamilyConstants {
    pub profile: SpectralProfile,
    pub vectors: PerronVectors,
    pub q: Vec<DMatrix<f64>>,
    pub sigma2: f64,
    pub c_scal: f64,
    pub c_scal_by_type: f64,
    pub flattened: FlattenedMoments,
}

impl FamilyConstants {
    pub fn compute(family: &OffspringFamily) -> Result<Self> {
        let profile = classify_family(family)?;
        let vectors = perron_vectors(&profile)?;
        let q = q_matrices(&projection(family), family.k());
        let s2 = sigma2(&vectors.a.rows(0, family.k()).into_owned(), &vectors.b, &q);
        let sigma = s2.max(0.0).sqrt();
        let weighted: f64 = family
            .lambda()
            .iter()
            .zip(vectors.a.iter())
            .map(|(&l, &a)| l as f64 * a)
            .sum();
        let a1 = vectors.a[0];
        let means: Vec<f64> = vectors.a.iter().map(|&a| a / a1).collect();
        let c1 = family
            .lambda()
            .iter()
            .zip(&means)
            .map(|(&l, &m)| l as f64 * m)
            .sum();
        Ok(FamilyConstants {
            profile,
            vectors,
            q,
            sigma2: s2,
            c_scal: sigma / 2.0 * weighted.sqrt(),
            c_scal_by_type: sigma / 2.0,
            flattened: FlattenedMoments { means, c1 },
        })
    }
}

pub fn scaling_constant(family: &OffspringFamily, mode: ScalingMode) -> Result<f64> {
    let c = FamilyConstants::compute(family)?;
    Ok(match mode {
        ScalingMode::LinearCombination => c.c_scal,
        ScalingMode::ByType => c.c_scal_by_type,
    })
}

pub fn flattened_moments(family: &OffspringFamily) -> Result<FlattenedMoments> {
    Ok(FamilyConstants::compute(family)?.flattened)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::config::preset;
    use crate::kernel::law::{OffspringLaw, TypedWord};

    fn single(words: Vec<(Vec<u16>, f64)>, t: usize) -> OffspringLaw {
        OffspringLaw::new(
            words
                .into_iter()
                .map(|(w, p)| (TypedWord::new(w), p))
                .collect(),
            t,
        )
        .unwrap()
    }

    #[test]
    fn projection_is_order_insensitive() {
        let law = single(
            vec![(vec![0, 1], 0.25), (vec![1, 0], 0.25), (vec![], 0.5)],
            2,
        );
        let other = single(vec![(vec![], 1.0)], 2);
        let fam = OffspringFamily::new(2, 0, vec![law, other], vec![1, 0]).unwrap();
        let mu = projection(&fam);
        assert!((mu.per_type[0][&vec![1, 1]] - 0.5).abs() < 1e-15);
        for law in &mu.per_type {
            assert!((law.values().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn binary_constants() {
        let c = FamilyConstants::compute(&preset("monotype_binary").unwrap()).unwrap();
        assert!((c.sigma2 - 1.0).abs() < 1e-12);
        assert!((c.c_scal - 0.5).abs() < 1e-12);
        assert!((c.flattened.means[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_type_constants() {
        let c = FamilyConstants::compute(&preset("two_type").unwrap()).unwrap();
        assert!((c.vectors.a[0] - 0.8).abs() < 1e-12);
        assert!((c.vectors.b[1] - 5.0 / 3.0).abs() < 1e-12);
        assert!((c.sigma2 - 5.0 / 9.0).abs() < 1e-12);
        assert!((c.c_scal - 5f64.sqrt() / 6.0).abs() < 1e-12);
        assert!((c.flattened.c1 - 1.25).abs() < 1e-12);
    }

    #[test]
    fn unary_families_have_zero_variance() {
        let unary = single(vec![(vec![0], 1.0)], 1);
        let fam = OffspringFamily::new(1, 0, vec![unary], vec![1]).unwrap();
        let c = FamilyConstants::compute(&fam).unwrap();
        assert_eq!(c.q[0][(0, 0)], 0.0);
        assert_eq!(c.sigma2, 0.0);

        let swap_a = single(vec![(vec![1], 1.0)], 2);
        let swap_b = single(vec![(vec![0], 1.0)], 2);
        let fam = OffspringFamily::new(2, 0, vec![swap_a, swap_b], vec![1, 1]).unwrap();
        let c = FamilyConstants::compute(&fam).unwrap();
        assert_eq!(c.sigma2, 0.0);
        assert!((c.flattened.means[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn by_type_constant_ignores_lambda() {
        let fam = preset("two_type").unwrap();
        let a = scaling_constant(&fam, ScalingMode::ByType).unwrap();
        let b =
            scaling_constant(&fam.with_lambda(vec![3, 7]).unwrap(), ScalingMode::ByType).unwrap();
        assert_eq!(a, b);
    }
}
