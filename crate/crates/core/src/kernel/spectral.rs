//! Mean matrices, Perron roots and Perron vectors.

use nalgebra::{DMatrix, DVector};

use super::family::OffspringFamily;
use crate::error::{Error, Result};

pub const POWER_MAX_ITERS: usize = 200;
pub const POWER_TOL: f64 = 1e-12;
pub const CRITICAL_BAND: f64 = 1e-9;
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Criticality {
    Subcritical,
    Critical,
    Supercritical,
}

#[derive(Clone, Debug)]
pub struct SpectralProfile {
    /// Full (K + K') mean matrix A.
    pub mean_matrix: DMatrix<f64>,
    pub k: usize,
    pub k_prime: usize,
    /// Perron root of the critical block M.
    pub radius: f64,
    /// Perron root of the subcritical block M' (0 when K' = 0).
    pub subcritical_radius: f64,
    pub classification: Criticality,
    pub irreducible_on_critical_block: bool,
    pub subcritical_block_ok: bool,
}

/// Left and right Perron vectors: `a` over all K + K' types with the critical
/// part summing to one, `b` over the critical block with `Σ a_i b_i = 1`.
#[derive(Clone, Debug)]
pub struct PerronVectors {
    pub a: DVector<f64>,
    pub b: DVector<f64>,
}

/// `A_ij = E[#_j w^(i)]`.
pub fn mean_matrix(family: &OffspringFamily) -> DMatrix<f64> {
    let t = family.num_types();
    let mut a = DMatrix::zeros(t, t);
    for (i, law) in family.laws().iter().enumerate() {
        for (w, p) in law.support() {
            for &s in &w.symbols {
                a[(i, s as usize)] += p;
            }
        }
    }
    a
}

impl SpectralProfile {
    pub fn critical_block(&self) -> DMatrix<f64> {
        self.mean_matrix.view((0, 0), (self.k, self.k)).into_owned()
    }

    pub fn subcritical_block(&self) -> DMatrix<f64> {
        let k = self.k;
        self.mean_matrix
            .view((k, k), (self.k_prime, self.k_prime))
            .into_owned()
    }

    pub fn coupling_block(&self) -> DMatrix<f64> {
        self.mean_matrix
            .view((0, self.k), (self.k, self.k_prime))
            .into_owned()
    }
}

pub fn classify(a: &DMatrix<f64>, k: usize) -> Result<SpectralProfile> {
    let t = a.nrows();
    assert_eq!(t, a.ncols(), "mean matrix must be square");
    assert!(k >= 1 && k <= t, "critical block size out of range");
    if a.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidFamily(
            "mean matrix must be finite and nonnegative".into(),
        ));
    }
    let m = a.view((0, 0), (k, k)).into_owned();
    let radius = spectral_radius(&m)?;
    let subcritical_radius = if t > k {
        spectral_radius(&a.view((k, k), (t - k, t - k)).into_owned())?
    } else {
        0.0
    };
    let classification = if (radius - 1.0).abs() <= CRITICAL_BAND {
        Criticality::Critical
    } else if radius < 1.0 {
        Criticality::Subcritical
    } else {
        Criticality::Supercritical
    };
    Ok(SpectralProfile {
        mean_matrix: a.clone(),
        k,
        k_prime: t - k,
        radius,
        subcritical_radius,
        classification,
        irreducible_on_critical_block: is_irreducible(&m),
        subcritical_block_ok: subcritical_radius < 1.0 - 1e-10,
    })
}

pub fn classify_family(family: &OffspringFamily) -> Result<SpectralProfile> {
    classify(&mean_matrix(family), family.k())
}

/// Strong connectivity of the positivity pattern (Warshall closure). A 1×1
/// matrix counts as irreducible.
pub fn is_irreducible(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    if n <= 1 {
        return true;
    }
    let mut reach: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)] > 0.0).collect())
        .collect();
    for via in 0..n {
        for i in 0..n {
            if reach[i][via] {
                for j in 0..n {
                    if reach[via][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    reach.iter().all(|row| row.iter().all(|&r| r))
}

/// Perron root of a nonnegative square matrix. Power iteration on `A + I`
/// (primitive whenever A is irreducible, so periodic patterns converge); if it
/// stalls, falls back to the Schur eigenvalues.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    let n = m.nrows();
    if n == 0 {
        return Ok(0.0);
    }
    if let Some(r) = shifted_power_iteration(m) {
        return Ok(r);
    }
    let eig = m.clone().complex_eigenvalues();
    let r = eig.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    if r.is_finite() {
        Ok(r)
    } else {
        Err(Error::NonConvergence {
            iterations: POWER_MAX_ITERS,
        })
    }
}

fn shifted_power_iteration(m: &DMatrix<f64>) -> Option<f64> {
    let n = m.nrows();
    let shifted = m + DMatrix::<f64>::identity(n, n);
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut prev = f64::NAN;
    for _ in 0..POWER_MAX_ITERS {
        let y = &shifted * &x;
        let r = y.iter().sum::<f64>();
        if !(r.is_finite() && r > 0.0) {
            return None;
        }
        let next = y / r;
        let step = (&next - &x).amax();
        x = next;
        if (r - prev).abs() <= POWER_TOL * r.max(1.0) && step <= 1e-11 {
            // Rayleigh-type refinement with the converged vector.
            let y = &shifted * &x;
            let rq = y.dot(&x) / x.dot(&x);
            return Some(rq - 1.0);
        }
        prev = r;
    }
    None
}

/// Unit null vector of a square matrix (right singular vector for the
/// smallest singular value), sign-fixed to a nonnegative sum.
fn null_vector(x: &DMatrix<f64>) -> DVector<f64> {
    let svd = x.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (imin, _) =
        svd.singular_values
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc },
            );
    let v: DVector<f64> = v_t.row(imin).transpose();
    if v.sum() < 0.0 {
        -v
    } else {
        v
    }
}

pub fn perron_vectors(profile: &SpectralProfile) -> Result<PerronVectors> {
    if profile.classification != Criticality::Critical {
        return Err(Error::NotCritical {
            radius: profile.radius,
        });
    }
    if !profile.irreducible_on_critical_block {
        return Err(Error::ReducibleCriticalBlock);
    }
    if !profile.subcritical_block_ok {
        return Err(Error::SingularSubcriticalBlock {
            radius: profile.subcritical_radius,
        });
    }
    let k = profile.k;
    let m = profile.critical_block();
    let eye = DMatrix::<f64>::identity(k, k);

    let mut a_crit = null_vector(&(m.transpose() - &eye));
    a_crit /= a_crit.sum();
    let mut b = null_vector(&(&m - &eye));
    b /= a_crit.dot(&b);

    let res_a = (m.tr_mul(&a_crit) - &a_crit).amax();
    let res_b = (&m * &b - &b).amax();
    if res_a >= RESIDUAL_TOL || res_b >= RESIDUAL_TOL {
        return Err(Error::NotCritical {
            radius: profile.radius,
        });
    }
    if a_crit.iter().chain(b.iter()).any(|&x| x <= 0.0) {
        return Err(Error::ReducibleCriticalBlock);
    }

    let mut a = DVector::zeros(k + profile.k_prime);
    a.rows_mut(0, k).copy_from(&a_crit);
    if profile.k_prime > 0 {
        let kp = profile.k_prime;
        let s = profile.coupling_block();
        let m_sub = profile.subcritical_block();
        let lhs = (DMatrix::<f64>::identity(kp, kp) - m_sub).transpose();
        let rhs = s.tr_mul(&a_crit);
        let a_sub = lhs
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularSubcriticalBlock {
                radius: profile.subcritical_radius,
            })?;
        if a_sub.iter().any(|x| !x.is_finite()) {
            return Err(Error::SingularSubcriticalBlock {
                radius: profile.subcritical_radius,
            });
        }
        a.rows_mut(k, kp).copy_from(&a_sub);
        let full_res = (profile.mean_matrix.tr_mul(&a) - &a).amax();
        if full_res >= RESIDUAL_TOL * a.amax().max(1.0) {
            return Err(Error::SingularSubcriticalBlock {
                radius: profile.subcritical_radius,
            });
        }
    }
    Ok(PerronVectors { a, b })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows.len(), rows[0].len(), &rows.concat())
    }

    #[test]
    fn permutation_matrix_is_critical_and_irreducible() {
        let p = classify(&mat(&[&[0.0, 1.0], &[1.0, 0.0]]), 2).unwrap();
        assert!((p.radius - 1.0).abs() < 1e-12);
        assert!(p.irreducible_on_critical_block);
        assert_eq!(p.classification, Criticality::Critical);
        let v = perron_vectors(&p).unwrap();
        assert!((v.a[0] - 0.5).abs() < 1e-12 && (v.a[1] - 0.5).abs() < 1e-12);
        assert!((v.b[0] - 1.0).abs() < 1e-12 && (v.b[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reducible_block_example() {
        let p = classify(&mat(&[&[1.0, 1.0], &[0.0, 0.5]]), 1).unwrap();
        assert_eq!(p.classification, Criticality::Critical);
        assert!(p.subcritical_block_ok);
        assert!((p.subcritical_radius - 0.5).abs() < 1e-12);
        let v = perron_vectors(&p).unwrap();
        assert!((v.a[0] - 1.0).abs() < 1e-12);
        assert!((v.a[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn subcritical_and_supercritical() {
        let p = classify(&mat(&[&[0.5]]), 1).unwrap();
        assert_eq!(p.classification, Criticality::Subcritical);
        assert!(matches!(perron_vectors(&p), Err(Error::NotCritical { .. })));
        let p = classify(&mat(&[&[2.0]]), 1).unwrap();
        assert_eq!(p.classification, Criticality::Supercritical);
    }

    #[test]
    fn reducible_critical_block_is_flagged() {
        let p = classify(&mat(&[&[1.0, 1.0], &[0.0, 0.5]]), 2).unwrap();
        assert!(!p.irreducible_on_critical_block);
        assert!(matches!(
            perron_vectors(&p),
            Err(Error::ReducibleCriticalBlock)
        ));
    }

    #[test]
    fn singular_subcritical_block() {
        let p = classify(&mat(&[&[1.0, 1.0], &[0.0, 1.0]]), 1).unwrap();
        assert!(!p.subcritical_block_ok);
        assert!(matches!(
            perron_vectors(&p),
            Err(Error::SingularSubcriticalBlock { .. })
        ));
    }

    #[test]
    fn zero_matrix_has_zero_radius() {
        assert_eq!(spectral_radius(&DMatrix::zeros(3, 3)).unwrap(), 0.0);
    }

    #[test]
    fn jordan_block_falls_back() {
        // Nontrivial Jordan structure slows power iteration; the result must still be right.
        let m = mat(&[&[1.0, 1.0, 0.0], &[0.0, 1.0, 1.0], &[0.0, 0.0, 1.0]]);
        let r = spectral_radius(&m).unwrap();
        assert!((r - 1.0).abs() < 1e-6);
    }
}
