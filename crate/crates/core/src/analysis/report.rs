//! Concentration and blob-size reports over a batch of conditioned trees.

use serde::Serialize;

use super::stats::mean_se;
use super::summary::TreeSummary;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::kernel::{FamilyConstants, OffspringFamily};
use crate::sampler::{simulate_blob, CompiledFamily, RngStream};

/// One aggregated statistic with its pre-registered verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatReport {
    pub statistic: String,
    pub estimate: f64,
    pub se: f64,
    pub replicates: u64,
    pub target: Option<f64>,
    pub pass: bool,
}

/// Bands fixed before any tree is looked at.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConcentrationConfig {
    /// Window exponent: `|ℓ - n/c₁| ≤ n^(1/2 + δ)`.
    pub delta: f64,
    /// Required fraction of replicates inside the window.
    pub min_rate: f64,
    /// Width of the band in propagated standard errors.
    pub se_band: f64,
    /// Extra slack `allowance · (1 + |target|) / n` for the O(1/n) bias of
    /// fixed-size means.
    pub allowance: f64,
    /// `C` in the `C ln n` outdegree bound.
    pub log_constant: f64,
    /// Smallest target probability for which a per-d line is reported.
    pub min_cell: f64,
}

impl Default for ConcentrationConfig {
    fn default() -> Self {
        ConcentrationConfig {
            delta: 0.1,
            min_rate: 0.99,
            se_band: 4.0,
            allowance: 4.0,
            log_constant: 20.0,
            min_cell: 1e-4,
        }
    }
}

/// Monte Carlo estimates of the law of the blob frontier size `ξ̃₁`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlobTargets {
    pub c1: f64,
    pub simulations: u64,
    /// `P(ξ̃₁ = d)`.
    pub frontier_law: Vec<f64>,
    /// `E[ξ̃₁]` and its standard error.
    pub mean: (f64, f64),
    /// `E[ξ̃₁²]` and its standard error.
    pub second_moment: (f64, f64),
    /// `E[ξ̃_i]` per type and standard error.
    pub type_means: Vec<(f64, f64)>,
}

impl BlobTargets {
    /// Uses streams `first_stream..` of `seed`, one per chunk of 4096 blobs.
    pub fn monte_carlo(
        family: &OffspringFamily,
        simulations: u64,
        seed: u64,
        first_stream: u64,
        exec: &Executor,
    ) -> Result<Self> {
        let c1 = FamilyConstants::compute(family)?.flattened.c1;
        let cf = CompiledFamily::new(family);
        let t = family.num_types();
        const CHUNK: u64 = 4096;
        let chunks = simulations.div_ceil(CHUNK);
        let parts = exec.try_map(0..chunks, |c| {
            let mut rng = RngStream::new(seed, first_stream + c).rng();
            let todo = CHUNK.min(simulations - c * CHUNK);
            let mut out = Vec::with_capacity(todo as usize);
            for _ in 0..todo {
                let b = simulate_blob(&cf, &mut rng, 100_000_000)?;
                out.push(b.profile(t));
            }
            Ok(out)
        })?;
        let profiles: Vec<Vec<u32>> = parts.into_iter().flatten().collect();
        let dmax = profiles.iter().map(|p| p[0]).max().unwrap_or(0) as usize;
        let mut law = vec![0.0; dmax + 1];
        for p in &profiles {
            law[p[0] as usize] += 1.0;
        }
        let total = profiles.len() as f64;
        law.iter_mut().for_each(|x| *x /= total);
        let d: Vec<f64> = profiles.iter().map(|p| p[0] as f64).collect();
        let d2: Vec<f64> = d.iter().map(|x| x * x).collect();
        let type_means = (0..t)
            .map(|i| mean_se(&profiles.iter().map(|p| p[i] as f64).collect::<Vec<_>>()))
            .collect();
        Ok(BlobTargets {
            c1,
            simulations,
            frontier_law: law,
            mean: mean_se(&d),
            second_moment: mean_se(&d2),
            type_means,
        })
    }

    pub fn frontier_variance(&self) -> f64 {
        self.second_moment.0 - self.mean.0 * self.mean.0
    }

    /// Standard error of the estimate of `P(ξ̃₁ = d)`.
    pub fn cell_se(&self, d: usize) -> f64 {
        let p = self.frontier_law.get(d).copied().unwrap_or(0.0);
        (p * (1.0 - p) / self.simulations as f64).sqrt()
    }
}

/// The common conditioning size, or `MixedConditioning`.
pub fn common_size(summaries: &[TreeSummary]) -> Result<u64> {
    let first = summaries
        .first()
        .ok_or_else(|| Error::InsufficientData("no replicates".into()))?
        .weighted_size;
    if let Some(s) = summaries.iter().find(|s| s.weighted_size != first) {
        return Err(Error::MixedConditioning {
            first,
            other: s.weighted_size,
        });
    }
    Ok(first)
}

fn band_check(
    est: f64,
    se: f64,
    target: f64,
    target_se: f64,
    n: f64,
    cfg: &ConcentrationConfig,
) -> bool {
    let band = cfg.se_band * (se * se + target_se * target_se).sqrt()
        + cfg.allowance * (1.0 + target.abs()) / n;
    (est - target).abs() <= band
}

pub fn concentration_report(
    summaries: &[TreeSummary],
    targets: &BlobTargets,
    cfg: &ConcentrationConfig,
) -> Result<Vec<StatReport>> {
    let n = common_size(summaries)?;
    let nf = n as f64;
    let r = summaries.len() as u64;
    let c1 = targets.c1;
    let mut out = Vec::new();

    let window = nf.powf(0.5 + cfg.delta);
    let inside = summaries
        .iter()
        .filter(|s| (s.type0 as f64 - nf / c1).abs() <= window)
        .count() as f64;
    let rate = inside / r as f64;
    out.push(StatReport {
        statistic: format!("type0_within_n^{:.2}", 0.5 + cfg.delta),
        estimate: rate,
        se: (rate * (1.0 - rate) / r as f64).sqrt(),
        replicates: r,
        target: Some(1.0),
        pass: rate >= cfg.min_rate,
    });

    let observed_max = summaries
        .iter()
        .map(|s| s.reduced_degrees.len())
        .max()
        .unwrap_or(0);
    let dmax = observed_max.max(targets.frontier_law.len());
    for d in 0..dmax {
        let p = targets.frontier_law.get(d).copied().unwrap_or(0.0);
        if p < cfg.min_cell {
            continue;
        }
        let xs: Vec<f64> = summaries
            .iter()
            .map(|s| s.reduced_degrees.get(d).copied().unwrap_or(0) as f64 / nf)
            .collect();
        let (m, se) = mean_se(&xs);
        let target = p / c1;
        out.push(StatReport {
            statistic: format!("N_{d}/n"),
            estimate: m,
            se,
            replicates: r,
            target: Some(target),
            pass: band_check(m, se, target, targets.cell_se(d) / c1, nf, cfg),
        });
    }

    let bound = cfg.log_constant * nf.ln();
    let worst = summaries
        .iter()
        .map(|s| s.max_reduced_outdegree())
        .max()
        .unwrap_or(0) as f64;
    out.push(StatReport {
        statistic: "max_reduced_outdegree".into(),
        estimate: worst,
        se: 0.0,
        replicates: r,
        target: Some(bound),
        pass: worst <= bound,
    });

    let xs: Vec<f64> = summaries
        .iter()
        .map(|s| c1 * s.reduced_second_moment() / nf)
        .collect();
    let (m, se) = mean_se(&xs);
    let (t2, t2_se) = targets.second_moment;
    out.push(StatReport {
        statistic: "c1*sum_d d^2 N_d/n".into(),
        estimate: m,
        se,
        replicates: r,
        target: Some(t2),
        pass: band_check(m, se, t2, t2_se, nf, cfg),
    });
    Ok(out)
}

/// Largest outdegree `Δ` and largest blob `Δ'` against `C ln n`, plus the
/// exact bound `Δ' ≤ Δ + 1` on every replicate.
pub fn largest_blob_and_outdegree(
    summaries: &[TreeSummary],
    log_constant: f64,
) -> Result<Vec<StatReport>> {
    let n = common_size(summaries)?;
    let ln = (n as f64).ln().max(f64::MIN_POSITIVE);
    let r = summaries.len() as u64;
    let deg: Vec<f64> = summaries.iter().map(|s| s.max_outdegree as f64).collect();
    let blob: Vec<f64> = summaries.iter().map(|s| s.max_blob_size as f64).collect();
    let bound = log_constant * ln;
    let over = deg.iter().filter(|&&d| d > bound).count() as f64 / r as f64;
    let bounded = summaries
        .iter()
        .filter(|s| s.max_blob_size <= s.max_outdegree + 1)
        .count() as f64
        / r as f64;
    let line = |name: &str, xs: &[f64], target: Option<f64>, pass: bool| {
        let (m, se) = mean_se(xs);
        StatReport {
            statistic: name.into(),
            estimate: m,
            se,
            replicates: r,
            target,
            pass,
        }
    };
    let ratio = |xs: &[f64]| xs.iter().map(|x| x / ln).collect::<Vec<_>>();
    Ok(vec![
        line("max_outdegree", &deg, None, true),
        line("max_outdegree/ln_n", &ratio(&deg), None, true),
        line("max_blob_size", &blob, None, true),
        line("max_blob_size/ln_n", &ratio(&blob), None, true),
        StatReport {
            statistic: format!("P(max_outdegree>{log_constant}*ln_n)"),
            estimate: over,
            se: 0.0,
            replicates: r,
            target: Some(0.0),
            pass: over == 0.0,
        },
        StatReport {
            statistic: "P(max_blob<=max_outdegree+1)".into(),
            estimate: bounded,
            se: 0.0,
            replicates: r,
            target: Some(1.0),
            pass: bounded == 1.0,
        },
    ])
}
