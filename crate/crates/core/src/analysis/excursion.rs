//! Law of the maximum of the normalized Brownian excursion and a
//! random-walk oracle for it.

use std::f64::consts::PI;

use rand::Rng;

use crate::exec::Executor;
use crate::sampler::RngStream;

/// Terms smaller than this end the series.
pub const SERIES_TOL: f64 = 1e-12;

/// `P(max e ≤ x)` with series terms dropped below `tol`. Two equivalent theta
/// series are used, each where it converges fast.
pub fn excursion_max_cdf_tol(x: f64, tol: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.1 {
        let mut s = 0.0;
        for k in 1..10_000 {
            let k2 = (k * k) as f64;
            let t = (1.0 - 4.0 * k2 * x * x) * (-2.0 * k2 * x * x).exp();
            s += t;
            if t.abs() < tol {
                break;
            }
        }
        (1.0 + 2.0 * s).clamp(0.0, 1.0)
    } else {
        let pre = 2f64.sqrt() * PI.powf(2.5) / (x * x * x);
        let mut s = 0.0;
        for k in 1..10_000 {
            let k2 = (k * k) as f64;
            let t = k2 * (-PI * PI * k2 / (2.0 * x * x)).exp();
            s += t;
            if pre * t < tol {
                break;
            }
        }
        (pre * s).clamp(0.0, 1.0)
    }
}

pub fn excursion_max_cdf(x: f64) -> f64 {
    excursion_max_cdf_tol(x, SERIES_TOL)
}

/// Exact mean of the excursion maximum, `sqrt(π/2)`.
pub fn excursion_max_mean() -> f64 {
    (PI / 2.0).sqrt()
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> f64 {
    let n = steps + steps % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Mean of the excursion maximum as `∫ (1 - F)` over [0, 8] with the series
/// truncated at `tol`. The integrand beyond 8 is below 1e-100.
pub fn excursion_max_mean_by_quadrature(tol: f64) -> f64 {
    simpson(&|x| 1.0 - excursion_max_cdf_tol(x, tol), 0.0, 8.0, 40_000)
}

/// Heights of uniform Dyck paths with `2 * half_len` steps, one per stream.
/// Each path is a uniform arrangement of `half_len` up and `half_len + 1`
/// down steps rotated to its unique excursion, with the final step dropped.
pub fn dyck_heights(paths: u64, half_len: u64, seed: u64, exec: &Executor) -> Vec<u32> {
    exec.map(0..paths, |id| {
        let mut rng = RngStream::new(seed, id).rng();
        let total = 2 * half_len + 1;
        let mut ups = half_len;
        let mut steps = Vec::with_capacity(total as usize);
        for left in (1..=total).rev() {
            let up = rng.random_range(0..left) < ups;
            ups -= up as u64;
            steps.push(up);
        }
        // Rotate after the first minimum of the partial sums.
        let (mut s, mut best, mut at) = (0i64, i64::MAX, 0usize);
        for (i, &u) in steps.iter().enumerate() {
            s += if u { 1 } else { -1 };
            if s < best {
                best = s;
                at = i + 1;
            }
        }
        let n = steps.len();
        let (mut h, mut max) = (0i64, 0i64);
        for i in 0..n - 1 {
            h += if steps[(at + i) % n] { 1 } else { -1 };
            max = max.max(h);
        }
        max as u32
    })
}

/// Largest gap between the empirical `P(H ≤ h)` of Dyck heights and the
/// reference `F((h + 2) / sqrt(2m))` over the lattice; the shift by 2 is the
/// leading discrete correction.
pub fn dyck_discrepancy(heights: &[u32], half_len: u64) -> f64 {
    let hmax = heights.iter().copied().max().unwrap_or(0) as usize;
    let mut counts = vec![0u64; hmax + 1];
    for &h in heights {
        counts[h as usize] += 1;
    }
    let n = heights.len() as f64;
    let scale = (2.0 * half_len as f64).sqrt();
    let mut cum = 0u64;
    let mut d: f64 = 0.0;
    for (h, &c) in counts.iter().enumerate() {
        cum += c;
        let f = excursion_max_cdf((h as f64 + 2.0) / scale);
        d = d.max((cum as f64 / n - f).abs());
    }
    d
}


#[cfg(test)]
mod mean_tests {
    use super::*;

    #[test]
    fn quadrature_mean_matches_closed_form() {
        let coarse = excursion_max_mean_by_quadrature(1e-8);
        let fine = excursion_max_mean_by_quadrature(1e-14);
        assert!((fine - excursion_max_mean()).abs() < 1e-6, "{fine}");
        assert!((coarse - fine).abs() < 1e-6);
    }
}
