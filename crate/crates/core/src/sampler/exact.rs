//! Exact size-conditioned sampling through the reduced tree.
//!
//! A tree is cut into blobs, one per type-0 vertex. Blob classes (frontier
//! size d, λ-weight w of the non-type-0 members) are i.i.d. along the reduced
//! tree, so conditioning on `#_λ = n` amounts to conditioning the class
//! multiset on `Σ(d - 1) = -1` and `Σ w = n - λ₀ℓ`. The multiset and ℓ are
//! drawn exactly, arranged by the cycle lemma, and each vertex then receives
//! a blob drawn from its class.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use statrs::function::gamma::ln_gamma;

use super::blob::{simulate_blob_into, BlobDraw, BlobTable, DEFAULT_COVERAGE};
use super::compiled::CompiledFamily;
use super::cycle::rotation_index;
use crate::error::{Error, Result};
use crate::kernel::OffspringFamily;
use crate::tree::{Decoration, FlatTree, MultitypeTree, PlaneTree, NO_PARENT};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactOptions {
    /// Required coverage of the blob-class table.
    pub coverage: f64,
    /// Stage-one proposals per sample.
    pub max_attempts: u64,
    /// Blob simulations per sample.
    pub max_blob_draws: u64,
    pub max_blob_size: usize,
    pub blob_method: BlobMethod,
}

/// How a blob of a given class is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BlobMethod {
    /// Descend through the generating-function tables.
    #[default]
    Tables,
    /// Simulate unconditioned blobs until one of the class appears.
    Rejection,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            coverage: DEFAULT_COVERAGE,
            max_attempts: 100_000_000,
            max_blob_draws: 1_000_000_000,
            max_blob_size: 10_000_000,
            blob_method: BlobMethod::Tables,
        }
    }
}

/// ℓ values whose bound falls this far (in log) below the largest are dropped.
const LOG_WINDOW: f64 = 60.0;
const THETA_CLAMP: f64 = 30.0;
const BUCKETS: usize = 256;
/// Classes at least this likely are drawn by simulation under `Tables`.
const COMMON_CLASS: f64 = 0.05;

#[derive(Clone, Debug)]
enum Stage1 {
    /// Class counts are determined by ℓ.
    Unique {
        counts: Vec<Vec<(u32, u64)>>,
        alias: WeightedAliasIndex<f64>,
    },
    /// Tilted multinomial proposals accepted on an exact hit.
    Tilted {
        ells: Vec<u64>,
        bucket: Vec<u32>,
        alias: WeightedAliasIndex<f64>,
        tilted: Vec<WeightedAliasIndex<f64>>,
    },
}

/// Blobs drawn for one sample, in an arena.
#[derive(Clone, Debug, Default)]
struct BlobStore {
    offsets: Vec<u32>,
    types: Vec<u16>,
    parents: Vec<u32>,
}

impl BlobStore {
    fn blob(&self, i: usize) -> (&[u16], &[u32]) {
        let (a, b) = (self.offsets[i] as usize, self.offsets[i + 1] as usize);
        (&self.types[a..b], &self.parents[a..b])
    }
}

/// The intermediate objects of one exact sample.
#[derive(Clone, Debug)]
pub struct ExactParts {
    /// Reduced tree; vertex i carries class `classes[i]`.
    pub reduced: PlaneTree,
    pub classes: Vec<u32>,
    /// Stage-one proposals used.
    pub attempts: u64,
    /// Blob simulations used.
    pub blob_draws: u64,
    store: BlobStore,
    blob_of: Vec<u32>,
}

/// Precomputed tables for exact sampling of one family at one size.
#[derive(Clone, Debug)]
pub struct ExactSampler {
    cf: CompiledFamily,
    n: u64,
    table: BlobTable,
    class_of: HashMap<(u32, u64), u32>,
    stage1: Stage1,
    monotype: bool,
    opts: ExactOptions,
}

fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Tilting of the class law along the frontier (and weight) coordinates.
struct Tilter {
    logp: Vec<f64>,
    u: Vec<[f64; 2]>,
    dims: usize,
}

impl Tilter {
    fn log_z(&self, th: [f64; 2]) -> f64 {
        log_sum_exp(
            self.logp
                .iter()
                .zip(&self.u)
                .map(|(lp, u)| lp + th[0] * u[0] + th[1] * u[1]),
        )
    }

    /// Minimizes `log Z(θ) - θ·t` by damped Newton, warm-started at `th`.
    fn optimize(&self, t: [f64; 2], mut th: [f64; 2]) -> [f64; 2] {
        let obj = |th: [f64; 2]| self.log_z(th) - th[0] * t[0] - th[1] * t[1];
        // a warm start near the clamp can sit where the Hessian vanishes
        let mut f = obj(th);
        let f0 = obj([0.0; 2]);
        if !(f <= f0) {
            th = [0.0; 2];
            f = f0;
        }
        for _ in 0..100 {
            let lz = self.log_z(th);
            let (mut g, mut h) = ([0.0; 2], [[0.0; 2]; 2]);
            for (lp, u) in self.logp.iter().zip(&self.u) {
                let q = (lp + th[0] * u[0] + th[1] * u[1] - lz).exp();
                for i in 0..2 {
                    g[i] += q * u[i];
                    for j in 0..2 {
                        h[i][j] += q * u[i] * u[j];
                    }
                }
            }
            for i in 0..2 {
                for j in 0..2 {
                    h[i][j] -= g[i] * g[j];
                }
            }
            g[0] -= t[0];
            g[1] -= t[1];
            let step = if self.dims == 1 {
                if h[0][0] > 1e-300 {
                    [-g[0] / h[0][0], 0.0]
                } else {
                    [-g[0].signum(), 0.0]
                }
            } else {
                let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
                if det.abs() > 1e-300 * (1.0 + h[0][0].abs() * h[1][1].abs()) {
                    [
                        -(h[1][1] * g[0] - h[0][1] * g[1]) / det,
                        -(h[0][0] * g[1] - h[1][0] * g[0]) / det,
                    ]
                } else {
                    [-g[0].signum(), -g[1].signum()]
                }
            };
            let descent = [-g[0], if self.dims == 1 { 0.0 } else { -g[1] }];
            let mut improved = false;
            // Newton first, plain gradient when Newton fails to descend
            'dirs: for dir in [step, descent] {
                let mut s = 1.0;
                for _ in 0..60 {
                    let cand = [
                        (th[0] + s * dir[0]).clamp(-THETA_CLAMP, THETA_CLAMP),
                        (th[1] + s * dir[1]).clamp(-THETA_CLAMP, THETA_CLAMP),
                    ];
                    let fc = obj(cand);
                    if fc < f {
                        let done = (f - fc) < 1e-14 * (1.0 + f.abs());
                        th = cand;
                        f = fc;
                        improved = !done;
                        break 'dirs;
                    }
                    s *= 0.5;
                }
            }
            if !improved {
                break;
            }
        }
        th
    }
}

impl ExactSampler {
    pub fn new(family: &OffspringFamily, n: u64) -> Result<Self> {
        Self::with_options(family, n, ExactOptions::default())
    }

    pub fn with_options(family: &OffspringFamily, n: u64, opts: ExactOptions) -> Result<Self> {
        let lambda = family.lambda();
        let l0 = lambda[0];
        if n < l0 || (l0 == 0 && n == 0) {
            return Err(Error::Infeasible { n });
        }
        let l_max = if l0 > 0 { n / l0 } else { 50 * n + 1000 };
        let frontier_cap = (l_max - 1).min(u32::MAX as u64 - 1) as u32;
        let weight_cap = n - l0.min(n);
        let table = BlobTable::build(family, frontier_cap, weight_cap, opts.coverage)?;
        let class_of = table
            .classes
            .iter()
            .enumerate()
            .map(|(i, c)| ((c.frontier, c.weight), i as u32))
            .collect();
        let monotype = family.num_types() == 1;
        let stage1 = Self::build_stage1(&table, n, l0, l_max)?;
        Ok(ExactSampler {
            cf: CompiledFamily::new(family),
            n,
            table,
            class_of,
            stage1,
            monotype,
            opts,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn table(&self) -> &BlobTable {
        &self.table
    }

    /// Whether stage one has a unique class multiset for each ℓ.
    pub fn uses_unique_counts(&self) -> bool {
        matches!(self.stage1, Stage1::Unique { .. })
    }

    fn build_stage1(table: &BlobTable, n: u64, l0: u64, l_max: u64) -> Result<Stage1> {
        let cls = &table.classes;
        let r = cls.len();
        let w_active = cls.iter().any(|c| c.weight != cls[0].weight);
        let w0 = cls[0].weight;
        let ell_ok = |ell: u64| w_active || (ell as u128) * (w0 + l0) as u128 == n as u128;
        let rows = if w_active { 3 } else { 2 };
        let v = DMatrix::from_fn(rows, r, |i, j| match i {
            0 => 1.0,
            1 => cls[j].frontier as f64,
            _ => cls[j].weight as f64,
        });
        let rank = if r <= rows {
            v.clone().svd(false, false).rank(1e-9)
        } else {
            rows
        };

        if rank == r {
            let svd = v.svd(true, true);
            let mut counts = Vec::new();
            let mut logw = Vec::new();
            for ell in 1..=l_max {
                if !ell_ok(ell) || l0 * ell > n {
                    continue;
                }
                let mut rhs = vec![ell as f64, (ell - 1) as f64];
                if w_active {
                    rhs.push((n - l0 * ell) as f64);
                }
                let Ok(sol) = svd.solve(&DVector::from_vec(rhs), 1e-12) else {
                    continue;
                };
                let ints: Vec<i128> = sol.iter().map(|x| x.round() as i128).collect();
                if ints.iter().any(|&x| x < 0) {
                    continue;
                }
                let sum: i128 = ints.iter().sum();
                let sd: i128 = ints
                    .iter()
                    .zip(cls)
                    .map(|(k, c)| k * c.frontier as i128)
                    .sum();
                let sw: i128 = ints
                    .iter()
                    .zip(cls)
                    .map(|(k, c)| k * c.weight as i128)
                    .sum();
                if sum != ell as i128 || sd != ell as i128 - 1 || sw != (n - l0 * ell) as i128 {
                    continue;
                }
                let mut lw = -(ell as f64).ln() + ln_gamma(ell as f64 + 1.0);
                let mut cs = Vec::new();
                for (j, &k) in ints.iter().enumerate() {
                    if k > 0 {
                        lw += k as f64 * cls[j].prob.ln() - ln_gamma(k as f64 + 1.0);
                        cs.push((j as u32, k as u64));
                    }
                }
                counts.push(cs);
                logw.push(lw);
            }
            let m = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if counts.is_empty() || !m.is_finite() {
                return Err(Error::Infeasible { n });
            }
            let weights: Vec<f64> = logw.iter().map(|x| (x - m).exp()).collect();
            let alias = WeightedAliasIndex::new(weights).map_err(|_| Error::Infeasible { n })?;
            return Ok(Stage1::Unique { counts, alias });
        }

        let dims = if w_active { 2 } else { 1 };
        let tilter = Tilter {
            logp: cls.iter().map(|c| c.prob.ln()).collect(),
            u: cls
                .iter()
                .map(|c| {
                    [
                        c.frontier as f64,
                        if w_active { c.weight as f64 } else { 0.0 },
                    ]
                })
                .collect(),
            dims,
        };
        let target = |ell: u64| -> [f64; 2] {
            let e = ell as f64;
            [
                (e - 1.0) / e,
                if w_active {
                    (n - l0 * ell) as f64 / e
                } else {
                    0.0
                },
            ]
        };
        let s_of = |ell: u64| -> [f64; 2] {
            [
                (ell - 1) as f64,
                if w_active { (n - l0 * ell) as f64 } else { 0.0 },
            ]
        };
        let all: Vec<u64> = (1..=l_max).filter(|&e| ell_ok(e) && l0 * e <= n).collect();
        if all.is_empty() {
            return Err(Error::Infeasible { n });
        }
        // Two passes: coarse buckets over the whole range locate the window
        // of relevant ℓ, finer buckets over the window set the tilts.
        let bucketize = |ells: &[u64]| -> (Vec<u32>, Vec<[f64; 2]>) {
            let b = ells.len().min(BUCKETS);
            let mut bucket = Vec::with_capacity(ells.len());
            let mut thetas = Vec::with_capacity(b);
            let mut th = [0.0; 2];
            for k in 0..b {
                let (lo, hi) = (k * ells.len() / b, (k + 1) * ells.len() / b);
                let mid = ells[(lo + hi) / 2];
                th = tilter.optimize(target(mid), th);
                thetas.push(th);
                bucket.extend(std::iter::repeat_n(k as u32, hi - lo));
            }
            (bucket, thetas)
        };
        let log_q = |ells: &[u64], bucket: &[u32], thetas: &[[f64; 2]]| -> Vec<f64> {
            let lz: Vec<f64> = thetas.iter().map(|&th| tilter.log_z(th)).collect();
            ells.iter()
                .zip(bucket)
                .map(|(&ell, &b)| {
                    let th = thetas[b as usize];
                    let s = s_of(ell);
                    ell as f64 * lz[b as usize] - th[0] * s[0] - th[1] * s[1] - (ell as f64).ln()
                })
                .collect()
        };
        let (b0, t0) = bucketize(&all);
        let lq0 = log_q(&all, &b0, &t0);
        let m0 = lq0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let window: Vec<u64> = all
            .iter()
            .zip(&lq0)
            .filter(|(_, &q)| q >= m0 - LOG_WINDOW - 10.0)
            .map(|(&e, _)| e)
            .collect();
        let (bucket, thetas) = bucketize(&window);
        let lq = log_q(&window, &bucket, &thetas);
        let m = lq.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let keep: Vec<usize> = (0..window.len())
            .filter(|&i| lq[i] >= m - LOG_WINDOW)
            .collect();
        let ells: Vec<u64> = keep.iter().map(|&i| window[i]).collect();
        let weights: Vec<f64> = keep.iter().map(|&i| (lq[i] - m).exp()).collect();
        let used: Vec<u32> = keep.iter().map(|&i| bucket[i]).collect();
        let alias = WeightedAliasIndex::new(weights).map_err(|_| Error::Infeasible { n })?;
        let tilted = thetas
            .iter()
            .map(|&th| {
                let lw: Vec<f64> = tilter
                    .logp
                    .iter()
                    .zip(&tilter.u)
                    .map(|(lp, u)| lp + th[0] * u[0] + th[1] * u[1])
                    .collect();
                let mx = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                WeightedAliasIndex::new(lw.iter().map(|x| (x - mx).exp()).collect())
                    .expect("tilted class weights")
            })
            .collect();
        Ok(Stage1::Tilted {
            ells,
            bucket: used,
            alias,
            tilted,
        })
    }

    /// Draws ℓ and the class sequence in uniformly random order.
    fn stage1<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Vec<u32>, u64)> {
        let l0 = self.cf.lambda()[0];
        match &self.stage1 {
            Stage1::Unique { counts, alias, .. } => {
                let i = alias.sample(rng);
                let mut seq = Vec::new();
                for &(c, k) in &counts[i] {
                    seq.extend(std::iter::repeat_n(c, k as usize));
                }
                seq.shuffle(rng);
                Ok((seq, 1))
            }
            Stage1::Tilted {
                ells,
                bucket,
                alias,
                tilted,
            } => {
                let cls = &self.table.classes;
                let mut seq = Vec::new();
                for attempt in 1..=self.opts.max_attempts {
                    let i = alias.sample(rng);
                    let ell = ells[i];
                    let tab = &tilted[bucket[i] as usize];
                    let (td, tw) = (ell - 1, self.n - l0 * ell);
                    let (mut sd, mut sw) = (0u64, 0u64);
                    seq.clear();
                    let mut ok = true;
                    for _ in 0..ell {
                        let c = tab.sample(rng);
                        sd += cls[c].frontier as u64;
                        sw += cls[c].weight;
                        if sd > td || sw > tw {
                            ok = false;
                            break;
                        }
                        seq.push(c as u32);
                    }
                    if ok && sd == td && sw == tw {
                        return Ok((seq, attempt));
                    }
                }
                Err(Error::BudgetExhausted {
                    attempts: self.opts.max_attempts,
                })
            }
        }
    }

    /// Fills one blob per reduced vertex from its class.
    fn draw_blobs<R: Rng + ?Sized>(
        &self,
        classes: &[u32],
        rng: &mut R,
    ) -> Result<(BlobStore, Vec<u32>, u64)> {
        let mut store = BlobStore {
            offsets: vec![0],
            ..Default::default()
        };
        let mut blob_of = vec![u32::MAX; classes.len()];
        let mut rest: Vec<usize> = Vec::new();
        if self.opts.blob_method == BlobMethod::Tables {
            let (mut ty, mut pa) = (Vec::new(), Vec::new());
            let family = self.cf.family();
            for (i, &c) in classes.iter().enumerate() {
                let cl = self.table.classes[c as usize];
                // Common classes are cheaper to hit by simulation.
                if cl.prob >= COMMON_CLASS {
                    rest.push(i);
                    continue;
                }
                if self.table.sample_class_blob(
                    family,
                    cl.frontier,
                    cl.weight,
                    rng,
                    &mut ty,
                    &mut pa,
                ) {
                    blob_of[i] = (store.offsets.len() - 1) as u32;
                    store.types.extend_from_slice(&ty);
                    store.parents.extend_from_slice(&pa);
                    store.offsets.push(store.types.len() as u32);
                } else {
                    rest.push(i);
                }
            }
        } else {
            rest = (0..classes.len()).collect();
        }
        let draws = self.fill_by_rejection(classes, &rest, &mut store, &mut blob_of, rng)?;
        Ok((store, blob_of, draws))
    }

    /// Serves the vertices in `which` by simulating unconditioned blobs and
    /// keeping each one for a pending vertex of its class.
    fn fill_by_rejection<R: Rng + ?Sized>(
        &self,
        classes: &[u32],
        which: &[usize],
        store: &mut BlobStore,
        blob_of: &mut [u32],
        rng: &mut R,
    ) -> Result<u64> {
        let nc = self.table.classes.len();
        let mut waiting: Vec<Vec<usize>> = vec![Vec::new(); nc];
        for &i in which.iter().rev() {
            waiting[classes[i] as usize].push(i);
        }
        let mut remaining = which.len();
        let (mut max_d, mut max_w) = (0u32, 0u64);
        for &i in which {
            let cl = self.table.classes[classes[i] as usize];
            max_d = max_d.max(cl.frontier);
            max_w = max_w.max(cl.weight);
        }
        let (mut ty, mut pa, mut stack) = (Vec::new(), Vec::new(), Vec::new());
        let mut draws = 0u64;
        while remaining > 0 {
            if draws >= self.opts.max_blob_draws {
                return Err(Error::BudgetExhausted { attempts: draws });
            }
            draws += 1;
            let out = simulate_blob_into(
                &self.cf,
                rng,
                self.opts.max_blob_size,
                max_d,
                max_w,
                &mut ty,
                &mut pa,
                &mut stack,
            )?;
            let BlobDraw::Done { frontier, weight } = out else {
                continue;
            };
            let Some(&c) = self.class_of.get(&(frontier, weight)) else {
                continue;
            };
            let Some(i) = waiting[c as usize].pop() else {
                continue;
            };
            remaining -= 1;
            blob_of[i] = (store.offsets.len() - 1) as u32;
            store.types.extend_from_slice(&ty);
            store.parents.extend_from_slice(&pa);
            store.offsets.push(store.types.len() as u32);
        }
        Ok(draws)
    }

    /// Stages one to three: class sequence, reduced tree, and blobs.
    pub fn sample_parts<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ExactParts> {
        let (mut seq, attempts) = self.stage1(rng)?;
        let cls = &self.table.classes;
        let degrees: Vec<u32> = seq.iter().map(|&c| cls[c as usize].frontier).collect();
        let r = rotation_index(&degrees);
        seq.rotate_left(r);
        let rotated: Vec<u32> = seq.iter().map(|&c| cls[c as usize].frontier).collect();
        let reduced = PlaneTree::from_outdegrees(&rotated)?;
        let (store, blob_of, blob_draws) = if self.monotype {
            (BlobStore::default(), Vec::new(), 0)
        } else {
            self.draw_blobs(&seq, rng)?
        };
        Ok(ExactParts {
            reduced,
            classes: seq,
            attempts,
            blob_draws,
            store,
            blob_of,
        })
    }

    /// Glues the blobs along the reduced tree.
    pub fn assemble(&self, parts: &ExactParts) -> MultitypeTree {
        if self.monotype {
            return MultitypeTree::monotype(parts.reduced.clone());
        }
        let store = &parts.store;
        let total: usize = parts
            .blob_of
            .iter()
            .map(|&b| store.blob(b as usize).0.len())
            .sum::<usize>()
            - (parts.reduced.len() - 1);
        let mut parent = Vec::with_capacity(total);
        let mut types = Vec::with_capacity(total);
        let mut out_id = vec![0u32; store.types.len()];
        let mut root_parent = vec![NO_PARENT; parts.reduced.len()];
        // (reduced vertex, next local index, next frontier rank)
        let mut stack: Vec<(u32, u32, u32)> = vec![(0, 0, 0)];
        while let Some(top) = stack.last_mut() {
            let (i, j, k) = *top;
            let b = parts.blob_of[i as usize] as usize;
            let base = store.offsets[b] as usize;
            let (ty, pa) = store.blob(b);
            if j as usize == ty.len() {
                stack.pop();
                continue;
            }
            let p = if j == 0 {
                root_parent[i as usize]
            } else {
                out_id[base + pa[j as usize] as usize]
            };
            if j > 0 && ty[j as usize] == 0 {
                let child = parts.reduced.children(i as usize)[k as usize];
                root_parent[child as usize] = p;
                *top = (i, j + 1, k + 1);
                stack.push((child, 0, 0));
                continue;
            }
            let id = parent.len() as u32;
            out_id[base + j as usize] = id;
            parent.push(p);
            types.push(ty[j as usize]);
            *top = (i, j + 1, k);
        }
        let len = parent.len();
        let shape = PlaneTree::from_preorder_parents_unchecked(parent, len);
        let t = MultitypeTree::from_parts_unchecked(shape, types);
        assert_eq!(
            t.weighted_size(self.cf.lambda()),
            self.n,
            "conditioned size mismatch"
        );
        t
    }

    /// The flat tree and decoration of a sample; blowing them up gives the
    /// same tree as [`ExactSampler::assemble`].
    pub fn flat_parts(&self, parts: &ExactParts) -> (FlatTree, Decoration) {
        let red = &parts.reduced;
        if self.monotype {
            let t = MultitypeTree::monotype(red.clone());
            let tau = FlatTree::new_unchecked(t);
            let deco = Decoration::stars(&tau);
            return (tau, deco);
        }
        enum Step {
            Enter(u32, u32),
            Leaves(u32, u32),
        }
        let mut parent = Vec::new();
        let mut types = Vec::new();
        let mut deco = Decoration::new();
        let mut leaves: Vec<u16> = Vec::new();
        let mut stack = vec![Step::Enter(0, NO_PARENT)];
        while let Some(step) = stack.pop() {
            match step {
                Step::Enter(i, p) => {
                    let id = parent.len() as u32;
                    parent.push(p);
                    types.push(0u16);
                    let (ty, pa) = parts.store.blob(parts.blob_of[i as usize] as usize);
                    deco.push(ty, pa);
                    stack.push(Step::Leaves(i, id));
                    for &c in red.children(i as usize).iter().rev() {
                        stack.push(Step::Enter(c, id));
                    }
                }
                Step::Leaves(i, id) => {
                    let (ty, _) = parts.store.blob(parts.blob_of[i as usize] as usize);
                    leaves.clear();
                    leaves.extend(ty[1..].iter().copied().filter(|&t| t != 0));
                    leaves.sort_unstable();
                    for &t in &leaves {
                        parent.push(id);
                        types.push(t);
                    }
                }
            }
        }
        let len = parent.len();
        let shape = PlaneTree::from_preorder_parents_unchecked(parent, len);
        let tau = FlatTree::new_unchecked(MultitypeTree::from_parts_unchecked(shape, types));
        (tau, deco)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<MultitypeTree> {
        let parts = self.sample_parts(rng)?;
        Ok(self.assemble(&parts))
    }
}

/// One exact draw of a tree conditioned on `#_λ = n`. Builds the tables on
/// every call; reuse an [`ExactSampler`] for batches.
pub fn sample_conditioned_exact<R: Rng + ?Sized>(
    family: &OffspringFamily,
    n: u64,
    rng: &mut R,
) -> Result<MultitypeTree> {
    ExactSampler::new(family, n)?.sample(rng)
}
