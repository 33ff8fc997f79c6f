//! Empirical height tails and the two-regime envelope fit.

use serde::Serialize;

use super::stats::wilson;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailConfig {
    /// Wilson band width in standard deviations.
    pub z: f64,
    /// Grid points enter the fit only with at least this many exceedances.
    pub min_exceedances: u64,
    pub min_replicates: usize,
}

impl Default for TailConfig {
    fn default() -> Self {
        TailConfig {
            z: 3.0,
            min_exceedances: 20,
            min_replicates: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailCurve {
    pub n: u64,
    pub replicates: u64,
    pub x: Vec<f64>,
    /// `P̂(H > x)`.
    pub survival: Vec<f64>,
    pub exceedances: Vec<u64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Fitted `C` and `c` of `C exp(-c x²/n) + C exp(-c x)`.
    pub big_c: f64,
    pub small_c: f64,
    pub fit_points: usize,
    pub envelope: Vec<f64>,
    /// Whether the envelope stays above every lower Wilson bound.
    pub dominates: bool,
}

impl TailCurve {
    pub fn envelope_at(&self, x: f64) -> f64 {
        envelope(self.big_c, self.small_c, self.n as f64, x)
    }
}

fn envelope(big_c: f64, c: f64, n: f64, x: f64) -> f64 {
    big_c * ((-c * x * x / n).exp() + (-c * x).exp())
}

fn ln_shape(c: f64, n: f64, x: f64) -> f64 {
    let a = -c * x * x / n;
    let b = -c * x;
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Integer grid `0..=max(H)`.
pub fn default_grid(heights: &[u32]) -> Vec<f64> {
    let m = heights.iter().copied().max().unwrap_or(0);
    (0..=m).map(f64::from).collect()
}

/// Survival curve with Wilson bands and the envelope fitted by least squares
/// on log-survival, with `C` raised where needed so the envelope clears the
/// lower band on the fitted points.
pub fn tail_curve(heights: &[u32], n: u64, grid: &[f64], cfg: &TailConfig) -> Result<TailCurve> {
    if heights.len() < cfg.min_replicates {
        return Err(Error::InsufficientData(format!(
            "{} replicates, need at least {}",
            heights.len(),
            cfg.min_replicates
        )));
    }
    let r = heights.len() as u64;
    let mut sorted = heights.to_vec();
    sorted.sort_unstable();
    let mut x = grid.to_vec();
    x.sort_by(f64::total_cmp);
    let exceedances: Vec<u64> = x
        .iter()
        .map(|&t| (sorted.len() - sorted.partition_point(|&h| (h as f64) <= t)) as u64)
        .collect();
    let survival: Vec<f64> = exceedances.iter().map(|&k| k as f64 / r as f64).collect();
    let (lo, hi): (Vec<f64>, Vec<f64>) = exceedances.iter().map(|&k| wilson(k, r, cfg.z)).unzip();

    let nf = n.max(1) as f64;
    let fit: Vec<usize> = (0..x.len())
        .filter(|&i| exceedances[i] >= cfg.min_exceedances && x[i] >= 0.0)
        .collect();
    let (big_c, small_c) = if fit.is_empty() {
        (0.0, 1.0)
    } else {
        let ln_s: Vec<f64> = fit.iter().map(|&i| survival[i].ln()).collect();
        let ln_lo: Vec<f64> = fit.iter().map(|&i| lo[i].ln()).collect();
        let cost = |c: f64| -> (f64, f64) {
            let g: Vec<f64> = fit.iter().map(|&i| ln_shape(c, nf, x[i])).collect();
            let ls = ln_s.iter().zip(&g).map(|(s, g)| s - g).sum::<f64>() / g.len() as f64;
            let floor = ln_lo
                .iter()
                .zip(&g)
                .map(|(l, g)| l - g)
                .fold(f64::NEG_INFINITY, f64::max);
            let ln_c = ls.max(floor);
            let sse = ln_s
                .iter()
                .zip(&g)
                .map(|(s, g)| (s - ln_c - g).powi(2))
                .sum();
            (sse, ln_c)
        };
        // coarse log grid, then golden-section refinement around the best
        let grid_c: Vec<f64> = (0..=400)
            .map(|k| 10f64.powf(-6.0 + 8.0 * k as f64 / 400.0))
            .collect();
        let best = (0..grid_c.len())
            .min_by(|&a, &b| cost(grid_c[a]).0.total_cmp(&cost(grid_c[b]).0))
            .unwrap();
        let (mut a, mut b) = (
            grid_c[best.saturating_sub(1)].ln(),
            grid_c[(best + 1).min(grid_c.len() - 1)].ln(),
        );
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..60 {
            let m1 = b - phi * (b - a);
            let m2 = a + phi * (b - a);
            if cost(m1.exp()).0 <= cost(m2.exp()).0 {
                b = m2;
            } else {
                a = m1;
            }
        }
        let c = ((a + b) / 2.0).exp();
        (cost(c).1.exp(), c)
    };
    let env: Vec<f64> = x.iter().map(|&t| envelope(big_c, small_c, nf, t)).collect();
    let dominates = env.iter().zip(&lo).all(|(e, l)| *e >= *l * (1.0 - 1e-12));
    Ok(TailCurve {
        n,
        replicates: r,
        x,
        survival,
        exceedances,
        lo,
        hi,
        big_c,
        small_c,
        fit_points: fit.len(),
        envelope: env,
        dominates,
    })
}

/// Whether `H ≤ n` for every replicate (meaningful when all λ_i > 0).
pub fn heights_within_size(heights: &[u32], n: u64) -> bool {
    heights.iter().all(|&h| h as u64 <= n)
}
