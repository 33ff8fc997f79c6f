//! Exponential tilting and the tilt solver.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::family::OffspringFamily;
use super::law::OffspringLaw;
use super::spectral::{mean_matrix, spectral_radius};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TiltParams {
    pub theta: Vec<f64>,
}

impl TiltParams {
    pub fn zero(num_types: usize) -> Self {
        TiltParams {
            theta: vec![0.0; num_types],
        }
    }
}

fn check_theta(family: &OffspringFamily, theta: &[f64]) -> Result<()> {
    if theta.len() != family.num_types() {
        return Err(Error::InvalidFamily(format!(
            "tilt has {} coordinates, family has {} types",
            theta.len(),
            family.num_types()
        )));
    }
    if theta.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidFamily(
            "tilt parameters must be finite".into(),
        ));
    }
    Ok(())
}

/// `ζ_θ(w) ∝ ζ(w) exp(θ · #w)`, renormalised per type.
pub fn tilt(family: &OffspringFamily, params: &TiltParams) -> Result<OffspringFamily> {
    let theta = &params.theta;
    check_theta(family, theta)?;
    let laws = family
        .laws()
        .iter()
        .map(|law| {
            let logs: Vec<f64> = law
                .support()
                .iter()
                .map(|(w, p)| p.ln() + w.symbols.iter().map(|&s| theta[s as usize]).sum::<f64>())
                .collect();
            let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let weights: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
            let total: f64 = weights.iter().sum();
            let support = law
                .support()
                .iter()
                .zip(weights)
                .map(|((w, _), x)| (w.clone(), x / total))
                .collect();
            OffspringLaw::from_parts_unchecked(support, law.tail_mass_bound())
        })
        .collect();
    Ok(family.with_laws(laws))
}

/// `A^θ_ij = e^{θ_j} ∂_j φ_i(e^θ) / φ_i(e^θ)`, evaluated from the generating
/// functions of the untilted laws.
pub fn tilted_mean_formula(family: &OffspringFamily, params: &TiltParams) -> Result<DMatrix<f64>> {
    check_theta(family, &params.theta)?;
    let t = family.num_types();
    let z: Vec<f64> = params.theta.iter().map(|x| x.exp()).collect();
    let mut a = DMatrix::zeros(t, t);
    for (i, law) in family.laws().iter().enumerate() {
        let mut phi = 0.0;
        let mut grad = vec![0.0; t];
        for (w, p) in law.support() {
            let k = w.counts(t);
            let mono: f64 = k
                .iter()
                .zip(&z)
                .map(|(&kj, &zj)| zj.powi(kj as i32))
                .product();
            phi += p * mono;
            for j in 0..t {
                if k[j] > 0 {
                    let rest: f64 = k
                        .iter()
                        .zip(&z)
                        .enumerate()
                        .map(|(l, (&kl, &zl))| zl.powi(kl as i32 - (l == j) as i32))
                        .product();
                    grad[j] += p * k[j] as f64 * rest;
                }
            }
        }
        for j in 0..t {
            a[(i, j)] = z[j] * grad[j] / phi;
        }
    }
    Ok(a)
}

#[derive(Clone, Debug)]
pub struct TiltSolverOptions {
    pub max_iters: usize,
    /// Random restarts tried after the start at θ = 0.
    pub restarts: usize,
    pub seed: u64,
    pub fd_step: f64,
}

impl Default for TiltSolverOptions {
    fn default() -> Self {
        TiltSolverOptions {
            max_iters: 100,
            restarts: 16,
            seed: 0x7117,
            fd_step: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TiltSolution {
    pub theta: TiltParams,
    /// Perron root of the tilted critical block.
    pub radius: f64,
    /// Tilted left eigenvector, critical part normalised to sum one.
    pub left_vector: Vec<f64>,
    /// Max relative deviation of the restricted eigenvector from Y.
    pub direction_error: f64,
    pub iterations: usize,
    pub starts_used: usize,
}

struct Eval {
    residual: DVector<f64>,
    radius: f64,
    left: DVector<f64>,
}

fn left_vector_at(a: &DMatrix<f64>, k: usize, rho: f64) -> Option<DVector<f64>> {
    let t = a.nrows();
    let m = a.view((0, 0), (k, k)).into_owned();
    let x = m.transpose() - DMatrix::<f64>::identity(k, k) * rho;
    let svd = x.svd(false, true);
    let v_t = svd.v_t?;
    let imin = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?
        .0;
    let mut v: DVector<f64> = v_t.row(imin).transpose();
    v /= v.sum();
    let mut full = DVector::zeros(t);
    full.rows_mut(0, k).copy_from(&v);
    if t > k {
        let kp = t - k;
        let s = a.view((0, k), (k, kp)).into_owned();
        let m_sub = a.view((k, k), (kp, kp)).into_owned();
        let lhs = (DMatrix::<f64>::identity(kp, kp) * rho - m_sub).transpose();
        let sub = lhs.lu().solve(&s.tr_mul(&v))?;
        full.rows_mut(k, kp).copy_from(&sub);
    }
    full.iter().all(|x| x.is_finite()).then_some(full)
}

fn evaluate(
    family: &OffspringFamily,
    types: &[usize],
    target: &[f64],
    theta: &[f64],
) -> Option<Eval> {
    let tilted = tilt(
        family,
        &TiltParams {
            theta: theta.to_vec(),
        },
    )
    .ok()?;
    let a = mean_matrix(&tilted);
    let k = family.k();
    let rho = spectral_radius(&a.view((0, 0), (k, k)).into_owned()).ok()?;
    let left = left_vector_at(&a, k, rho)?;
    let restricted: f64 = types.iter().map(|&i| left[i]).sum();
    if !(restricted.is_finite() && restricted > 0.0) {
        return None;
    }
    let mut r = DVector::zeros(1 + types.len());
    r[0] = rho - 1.0;
    for (n, &i) in types.iter().enumerate() {
        r[n + 1] = left[i] / restricted - target[n];
    }
    Some(Eval {
        residual: r,
        radius: rho,
        left,
    })
}

/// Finds θ making the tilted family critical with its left Perron vector,
/// restricted to `types`, collinear with `direction`. Damped Gauss-Newton with
/// minimum-norm steps and a finite-difference Jacobian; restarts from seeded
/// random points when a start stalls.
pub fn solve_tilt(
    family: &OffspringFamily,
    types: &[usize],
    direction: &[f64],
    opts: &TiltSolverOptions,
) -> Result<TiltSolution> {
    if types.is_empty() || types.len() != direction.len() {
        return Err(Error::DegenerateDirection);
    }
    if direction.iter().any(|y| !(y.is_finite() && *y > 0.0)) {
        return Err(Error::DegenerateDirection);
    }
    if let Some(&bad) = types.iter().find(|&&i| i >= family.num_types()) {
        return Err(Error::InvalidFamily(format!(
            "type {} out of range",
            bad + 1
        )));
    }
    let total: f64 = direction.iter().sum();
    let target: Vec<f64> = direction.iter().map(|y| y / total).collect();
    let p = family.num_types();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(f64, Vec<f64>)> = None;

    for start in 0..=opts.restarts {
        let mut theta: Vec<f64> = if start == 0 {
            vec![0.0; p]
        } else {
            (0..p).map(|_| StandardNormal.sample(&mut rng)).collect()
        };
        let Some(mut cur) = evaluate(family, types, &target, &theta) else {
            continue;
        };
        for iter in 0..opts.max_iters {
            let dir_err = cur.residual.rows(1, types.len()).amax();
            if cur.residual[0].abs() < 1e-12 && dir_err < 1e-11 {
                let rel = types
                    .iter()
                    .enumerate()
                    .map(|(n, _)| (cur.residual[n + 1] / target[n]).abs())
                    .fold(0.0, f64::max);
                return Ok(TiltSolution {
                    theta: TiltParams { theta },
                    radius: cur.radius,
                    left_vector: cur.left.iter().copied().collect(),
                    direction_error: rel,
                    iterations: iter,
                    starts_used: start + 1,
                });
            }
            let Some(jac) = jacobian(family, types, &target, &theta, opts.fd_step) else {
                break;
            };
            let svd = jac.svd(true, true);
            let Ok(step) = svd.solve(&cur.residual, 1e-12 * svd.singular_values.max().max(1e-300))
            else {
                break;
            };
            let mut step = -step;
            let norm = step.norm();
            if norm > 2.0 {
                step *= 2.0 / norm;
            }
            let base = cur.residual.norm();
            let mut alpha = 1.0;
            let mut accepted = None;
            for _ in 0..40 {
                let trial: Vec<f64> = theta
                    .iter()
                    .zip(step.iter())
                    .map(|(t, s)| t + alpha * s)
                    .collect();
                if let Some(e) = evaluate(family, types, &target, &trial) {
                    if e.residual.norm() < base * (1.0 - 1e-4 * alpha) {
                        accepted = Some((trial, e));
                        break;
                    }
                }
                alpha *= 0.5;
            }
            match accepted {
                Some((t, e)) => {
                    theta = t;
                    cur = e;
                }
                None => break,
            }
        }
        let r = cur.residual.norm();
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, theta));
        }
    }
    let report = match best {
        Some((r, theta)) => format!(
            "best residual norm {r:.3e} at theta = [{}] after {} starts",
            theta
                .iter()
                .map(|t| format!("{t:.6}"))
                .collect::<Vec<_>>()
                .join(", "),
            opts.restarts + 1
        ),
        None => "residual map undefined at every start".into(),
    };
    Err(Error::NoConvergence(report))
}

fn jacobian(
    family: &OffspringFamily,
    types: &[usize],
    target: &[f64],
    theta: &[f64],
    h: f64,
) -> Option<DMatrix<f64>> {
    let p = theta.len();
    let mut jac = DMatrix::zeros(1 + types.len(), p);
    for j in 0..p {
        let mut plus = theta.to_vec();
        let mut minus = theta.to_vec();
        plus[j] += h;
        minus[j] -= h;
        let fp = evaluate(family, types, target, &plus)?;
        let fm = evaluate(family, types, target, &minus)?;
        jac.set_column(j, &((fp.residual - fm.residual) / (2.0 * h)));
    }
    Some(jac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::config::preset;
    use crate::kernel::law::TypedWord;

    #[test]
    fn zero_tilt_is_identity() {
        let fam = preset("two_type").unwrap();
        let t = tilt(&fam, &TiltParams::zero(2)).unwrap();
        for (a, b) in fam.laws().iter().zip(t.laws()) {
            for ((w1, p1), (w2, p2)) in a.support().iter().zip(b.support()) {
                assert_eq!(w1, w2);
                assert!((p1 - p2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn binary_tilt_by_ln2() {
        let fam = preset("monotype_binary").unwrap();
        let t = tilt(
            &fam,
            &TiltParams {
                theta: vec![2f64.ln()],
            },
        )
        .unwrap();
        assert!((t.prob_of(0, &TypedWord::empty()) - 0.2).abs() < 1e-12);
        assert!((t.prob_of(0, &TypedWord::new(vec![0, 0])) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn formula_matches_tilted_means() {
        let fam = preset("poisson_reducible").unwrap();
        let params = TiltParams {
            theta: vec![0.3, -0.7],
        };
        let direct = mean_matrix(&tilt(&fam, &params).unwrap());
        let formula = tilted_mean_formula(&fam, &params).unwrap();
        assert!((direct - formula).amax() < 1e-12);
    }

    #[test]
    fn poisson2_tilts_to_critical() {
        let fam = preset("poisson2").unwrap();
        let sol = solve_tilt(&fam, &[0], &[1.0], &TiltSolverOptions::default()).unwrap();
        assert!((sol.theta.theta[0] + 2f64.ln()).abs() < 1e-8);
        assert!((sol.radius - 1.0).abs() < 1e-10);
    }

    #[test]
    fn critical_family_is_a_fixed_point() {
        let fam = preset("two_type").unwrap();
        let sol = solve_tilt(&fam, &[0, 1], &[0.8, 0.2], &TiltSolverOptions::default()).unwrap();
        assert!(sol.theta.theta.iter().all(|t| t.abs() < 1e-12));
        let binary = preset("monotype_binary").unwrap();
        let sol = solve_tilt(&binary, &[0], &[1.0], &TiltSolverOptions::default()).unwrap();
        assert_eq!(sol.theta.theta, vec![0.0]);
    }

    #[test]
    fn other_directions_are_reachable() {
        let fam = preset("two_type").unwrap();
        // Critical tilts of this family have a_2 / a_1 = P(word "2") in (0, 1/2).
        let sol = solve_tilt(&fam, &[0, 1], &[1.0, 0.4], &TiltSolverOptions::default()).unwrap();
        assert!((sol.radius - 1.0).abs() < 1e-10);
        assert!((sol.left_vector[1] / sol.left_vector[0] - 0.4).abs() < 1e-8);
        assert!((2.0 * sol.theta.theta[0] - 0.4f64.ln()).abs() < 1e-8);
        assert!((sol.theta.theta[1] - 1.6f64.ln()).abs() < 1e-8);
        assert!(solve_tilt(&fam, &[0, 1], &[1.0, 1.0], &TiltSolverOptions::default()).is_err());
    }

    #[test]
    fn localized_direction_fails() {
        let fam = preset("localized").unwrap();
        let err =
            solve_tilt(&fam, &[0, 1], &[1.0, 1.0], &TiltSolverOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NoConvergence(_)));
    }

    #[test]
    fn degenerate_direction() {
        let fam = preset("two_type").unwrap();
        assert!(matches!(
            solve_tilt(&fam, &[0, 1], &[1.0, 0.0], &TiltSolverOptions::default()),
            Err(Error::DegenerateDirection)
        ));
    }
}
