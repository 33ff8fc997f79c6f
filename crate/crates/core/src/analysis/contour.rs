//! Rescaled contour paths on a fixed grid and the heights-law comparison
//! with the excursion maximum.

use serde::Serialize;

use super::excursion::excursion_max_cdf;
use super::stats::ks_statistic;
use crate::error::{Error, Result};
use crate::tree::PlaneTree;

pub const CONTOUR_GRID: usize = 1024;
pub const MIN_GOF_REPLICATES: usize = 10_000;

/// Scale taking the contour of the original tree to the normalized excursion.
pub fn original_contour_scale(c_scal: f64, n: u64) -> f64 {
    c_scal / (n as f64).sqrt()
}

/// Scale for the reduced tree: `sqrt(c₁/n)` times `σ̃/2`, where `σ̃²` is the
/// variance of the blob frontier size.
pub fn reduced_contour_scale(c1: f64, frontier_variance: f64, n: u64) -> f64 {
    (c1 / n as f64).sqrt() * frontier_variance.sqrt() / 2.0
}

/// `scale · C(x · 2(|t|-1))` on `points` equally spaced `x` in [0, 1], with
/// linear interpolation between contour steps.
pub fn rescaled_contour(t: &PlaneTree, scale: f64, points: usize) -> Vec<f64> {
    let c = t.contour_function();
    let last = (c.len() - 1) as f64;
    (0..points)
        .map(|k| {
            let x = if points > 1 {
                k as f64 / (points - 1) as f64
            } else {
                0.0
            };
            let s = x * last;
            let i = (s.floor() as usize).min(c.len() - 1);
            let j = (i + 1).min(c.len() - 1);
            let f = s - i as f64;
            scale * (c[i] as f64 * (1.0 - f) + c[j] as f64 * f)
        })
        .collect()
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HeightGof {
    pub replicates: u64,
    pub scale: f64,
    /// Two-sided KS distance to the excursion-maximum law.
    pub ks: f64,
    /// Kolmogorov tail probability at `sqrt(R)·KS`; only a rough guide since
    /// the heights are discrete and n is finite.
    pub p_value_proxy: f64,
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.3 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let t = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { t } else { -t };
        if t < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// KS comparison of `scale · H` against the excursion-maximum CDF.
pub fn crt_height_gof(heights: &[u32], scale: f64, min_replicates: usize) -> Result<HeightGof> {
    if heights.len() < min_replicates {
        return Err(Error::InsufficientData(format!(
            "{} replicates, need at least {min_replicates}",
            heights.len()
        )));
    }
    let xs: Vec<f64> = heights.iter().map(|&h| scale * h as f64).collect();
    let ks = ks_statistic(&xs, excursion_max_cdf);
    let r = heights.len() as f64;
    Ok(HeightGof {
        replicates: heights.len() as u64,
        scale,
        ks,
        p_value_proxy: kolmogorov_sf(r.sqrt() * ks),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_vertex_is_flat() {
        let p = rescaled_contour(&PlaneTree::single(), 1.0, CONTOUR_GRID);
        assert_eq!(p.len(), CONTOUR_GRID);
        assert!(p.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn endpoints_and_max() {
        let t = PlaneTree::from_outdegrees(&[2, 1, 0, 1, 1, 0]).unwrap();
        let p = rescaled_contour(&t, 0.5, CONTOUR_GRID);
        assert_eq!(p[0], 0.0);
        assert_eq!(p[CONTOUR_GRID - 1], 0.0);
        let max = p.iter().copied().fold(0.0, f64::max);
        let step = 0.5 * t.height() as f64 / ((CONTOUR_GRID - 1) as f64 / 10.0);
        assert!((max - 0.5 * t.height() as f64).abs() <= step);
    }

    #[test]
    fn kolmogorov_values() {
        assert!((kolmogorov_sf(1.36) - 0.0495).abs() < 1e-3);
        assert!((kolmogorov_sf(1.63) - 0.0098).abs() < 1e-3);
    }
}
