//! Blobs: the part of a tree hanging off a type-0 vertex down to (and
//! including) the next type-0 vertices. Simulation, the exact law of the
//! (frontier size, weight) class, and the frontier-size-biased blob.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use super::compiled::CompiledFamily;
use crate::error::{Error, Result};
use crate::kernel::{mean_matrix, OffspringFamily};
use crate::tree::NO_PARENT;

/// Default required probability coverage of the blob-class table.
pub const DEFAULT_COVERAGE: f64 = 1.0 - 1e-9;

/// A blob in DFS order with local parents; vertex 0 is the type-0 root and the
/// type-0 vertices after it are frontier leaves.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Blob {
    pub types: Vec<u16>,
    pub parents: Vec<u32>,
}

impl Blob {
    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    /// Number of type-0 frontier leaves.
    pub fn frontier(&self) -> u32 {
        self.types[1..].iter().filter(|&&t| t == 0).count() as u32
    }

    /// λ-weight of the non-root-type members.
    pub fn weight(&self, lambda: &[u64]) -> u64 {
        self.types[1..]
            .iter()
            .filter(|&&t| t != 0)
            .map(|&t| lambda[t as usize])
            .sum()
    }

    /// Counts of members by type; entry 0 is the frontier size. This is the
    /// flattened offspring vector of the root.
    pub fn profile(&self, num_types: usize) -> Vec<u32> {
        let mut c = vec![0u32; num_types];
        for &t in &self.types[1..] {
            c[t as usize] += 1;
        }
        c
    }
}

/// Outcome of one blob simulation into scratch buffers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlobDraw {
    Done {
        frontier: u32,
        weight: u64,
    },
    /// Frontier or weight exceeded the caller's limits; the buffers hold a
    /// partial blob.
    Exceeded,
}

/// Simulates one blob into `types`/`parents` (cleared first). Stops early with
/// [`BlobDraw::Exceeded`] once the frontier passes `max_frontier` or the weight
/// passes `max_weight`, and fails with `Overflow` past `max_size` vertices.
#[allow(clippy::too_many_arguments)]
pub fn simulate_blob_into<R: Rng + ?Sized>(
    cf: &CompiledFamily,
    rng: &mut R,
    max_size: usize,
    max_frontier: u32,
    max_weight: u64,
    types: &mut Vec<u16>,
    parents: &mut Vec<u32>,
    stack: &mut Vec<(u16, u32)>,
) -> Result<BlobDraw> {
    types.clear();
    parents.clear();
    stack.clear();
    let lambda = cf.lambda();
    let (mut frontier, mut weight) = (0u32, 0u64);
    stack.push((0, NO_PARENT));
    while let Some((ty, p)) = stack.pop() {
        let id = types.len() as u32;
        types.push(ty);
        parents.push(p);
        if ty == 0 && p != NO_PARENT {
            frontier += 1;
            if frontier > max_frontier {
                return Ok(BlobDraw::Exceeded);
            }
            continue;
        }
        if p != NO_PARENT {
            weight += lambda[ty as usize];
            if weight > max_weight {
                return Ok(BlobDraw::Exceeded);
            }
        }
        let w = cf.sample_word(ty as usize, rng);
        if types.len() + stack.len() + w.len() > max_size {
            return Err(Error::Overflow {
                max_vertices: max_size,
            });
        }
        for &s in w.iter().rev() {
            stack.push((s, id));
        }
    }
    Ok(BlobDraw::Done { frontier, weight })
}

/// Simulates one unconditioned blob.
pub fn simulate_blob<R: Rng + ?Sized>(
    cf: &CompiledFamily,
    rng: &mut R,
    max_size: usize,
) -> Result<Blob> {
    let mut b = Blob::default();
    let mut stack = Vec::new();
    simulate_blob_into(
        cf,
        rng,
        max_size,
        u32::MAX,
        u64::MAX,
        &mut b.types,
        &mut b.parents,
        &mut stack,
    )?;
    Ok(b)
}

/// Bivariate polynomial in x (frontier) and y (weight), dense, with the
/// probability mass that fell beyond the caps still counted in `mass`.
#[derive(Clone, Debug)]
struct Poly {
    dl: usize,
    wl: usize,
    data: Vec<f64>,
    mass: f64,
}

#[derive(Clone, Copy, Debug)]
struct Caps {
    d: usize,
    w: usize,
}

const PRUNE: f64 = 1e-20;

impl Poly {
    fn zero() -> Self {
        Poly {
            dl: 0,
            wl: 0,
            data: Vec::new(),
            mass: 0.0,
        }
    }

    fn one() -> Self {
        Poly {
            dl: 1,
            wl: 1,
            data: vec![1.0],
            mass: 1.0,
        }
    }

    #[inline]
    fn get(&self, d: usize, w: usize) -> f64 {
        if d < self.dl && w < self.wl {
            self.data[d * self.wl + w]
        } else {
            0.0
        }
    }

    fn mul(&self, other: &Poly, caps: Caps) -> Poly {
        if self.data.is_empty() || other.data.is_empty() {
            return Poly {
                mass: self.mass * other.mass,
                ..Poly::zero()
            };
        }
        let dl = (self.dl + other.dl - 1).min(caps.d + 1);
        let wl = (self.wl + other.wl - 1).min(caps.w + 1);
        let mut data = vec![0.0; dl * wl];
        for d1 in 0..self.dl.min(dl) {
            for w1 in 0..self.wl.min(wl) {
                let a = self.data[d1 * self.wl + w1];
                if a == 0.0 {
                    continue;
                }
                let dmax = (dl - d1).min(other.dl);
                let wmax = (wl - w1).min(other.wl);
                for d2 in 0..dmax {
                    let row = (d1 + d2) * wl + w1;
                    let src = &other.data[d2 * other.wl..d2 * other.wl + wmax];
                    let dst = &mut data[row..row + wmax];
                    for (o, &b) in dst.iter_mut().zip(src) {
                        *o += a * b;
                    }
                }
            }
        }
        Poly {
            dl,
            wl,
            data,
            mass: self.mass * other.mass,
        }
    }

    /// `self += coeff * x^dshift * y^wshift * other`.
    fn add_shifted(&mut self, other: &Poly, coeff: f64, dshift: usize, wshift: usize, caps: Caps) {
        self.mass += coeff * other.mass;
        if other.data.is_empty() || dshift > caps.d || wshift > caps.w {
            return;
        }
        let dl = (other.dl + dshift).min(caps.d + 1);
        let wl = (other.wl + wshift).min(caps.w + 1);
        self.grow(dl, wl);
        for d in dshift..dl {
            let src = &other.data[(d - dshift) * other.wl..(d - dshift) * other.wl + (wl - wshift)];
            let row = d * self.wl + wshift;
            for (o, &b) in self.data[row..row + (wl - wshift)].iter_mut().zip(src) {
                *o += coeff * b;
            }
        }
    }

    fn grow(&mut self, dl: usize, wl: usize) {
        if dl <= self.dl && wl <= self.wl {
            return;
        }
        let (ndl, nwl) = (dl.max(self.dl), wl.max(self.wl));
        let mut data = vec![0.0; ndl * nwl];
        for d in 0..self.dl {
            data[d * nwl..d * nwl + self.wl]
                .copy_from_slice(&self.data[d * self.wl..(d + 1) * self.wl]);
        }
        self.dl = ndl;
        self.wl = nwl;
        self.data = data;
    }

    /// Drops trailing rows and columns whose entries are all below `PRUNE`;
    /// the dropped probability is removed from `mass`.
    fn trim(&mut self) {
        let mut wl = self.wl;
        while wl > 0 && (0..self.dl).all(|d| self.data[d * self.wl + wl - 1] < PRUNE) {
            wl -= 1;
        }
        let mut dl = self.dl;
        while dl > 0 && (0..wl).all(|w| self.data[(dl - 1) * self.wl + w] < PRUNE) {
            dl -= 1;
        }
        if wl == self.wl && dl == self.dl {
            return;
        }
        let mut data = vec![0.0; dl * wl];
        let mut lost = 0.0;
        for d in 0..self.dl {
            for w in 0..self.wl {
                let v = self.data[d * self.wl + w];
                if d < dl && w < wl {
                    data[d * wl + w] = v;
                } else {
                    lost += v;
                }
            }
        }
        self.mass -= lost;
        self.dl = dl;
        self.wl = wl;
        self.data = data;
    }
}

/// Words of one law grouped by their counts of non-type-0 symbols; within a
/// group the x-polynomial collects the type-0 counts.
#[derive(Clone, Debug)]
struct WordGroup {
    counts: Vec<(usize, u32)>,
    x_coeffs: Vec<f64>,
    /// Support indices and probabilities of the words, by type-0 count.
    words: Vec<Vec<(u32, f64)>>,
}

fn group_words(family: &OffspringFamily, ty: usize) -> Vec<WordGroup> {
    let t = family.num_types();
    let mut map: Vec<(Vec<u32>, Vec<f64>, Vec<Vec<(u32, f64)>>)> = Vec::new();
    let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
    for (wi, (w, p)) in family.law(ty).support().iter().enumerate() {
        let c = w.counts(t);
        let key = c[1..].to_vec();
        let slot = *index.entry(key.clone()).or_insert_with(|| {
            map.push((key, Vec::new(), Vec::new()));
            map.len() - 1
        });
        let (_, xc, words) = &mut map[slot];
        let c0 = c[0] as usize;
        if xc.len() <= c0 {
            xc.resize(c0 + 1, 0.0);
            words.resize(c0 + 1, Vec::new());
        }
        xc[c0] += p;
        words[c0].push((wi as u32, *p));
    }
    map.into_iter()
        .map(|(key, x_coeffs, words)| WordGroup {
            counts: key
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(j, &c)| (j + 1, c))
                .collect(),
            x_coeffs,
            words,
        })
        .collect()
}

/// One blob class: frontier size and λ-weight of the non-type-0 members.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlobClass {
    pub frontier: u32,
    pub weight: u64,
    pub prob: f64,
}

/// The law of (frontier, weight) of a blob, materialized up to caps.
#[derive(Clone, Debug)]
pub struct BlobTable {
    pub classes: Vec<BlobClass>,
    /// Probability accounted for (inside the caps or provably beyond them).
    pub coverage: f64,
    pub frontier_cap: u32,
    pub weight_cap: u64,
    pub iterations: usize,
    gf: BlobGf,
}

/// Converged generating-function tables kept for conditional sampling.
#[derive(Clone, Debug)]
struct BlobGf {
    lambda: Vec<u64>,
    groups: Vec<Vec<WordGroup>>,
    /// `powers[s][c]` is the c-th power of the type-s subtree series.
    powers: Vec<Vec<Poly>>,
    /// `suffix[j][g][k]`: product of the powers of the k-th and later
    /// non-type-0 symbol blocks of word group g of type j.
    suffix: Vec<Vec<Vec<Poly>>>,
}

/// Draws an index with probability proportional to `weights`, or `None` if
/// they sum to zero.
fn pick<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let mut u = rng.random::<f64>() * total;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last = Some(i);
            u -= w;
            if u < 0.0 {
                return Some(i);
            }
        }
    }
    last
}

/// Splits the target (d, w) between `a` and `b`: returns the part given to
/// `a`, drawn with probability proportional to `a[x] * b[target - x]`.
fn split<R: Rng + ?Sized>(
    a: &Poly,
    b: &Poly,
    d: usize,
    w: usize,
    rng: &mut R,
    buf: &mut Vec<f64>,
) -> Option<(usize, usize)> {
    let (dl, wl) = (a.dl.min(d + 1), a.wl.min(w + 1));
    buf.clear();
    for d1 in 0..dl {
        for w1 in 0..wl {
            let x = a.data[d1 * a.wl + w1];
            buf.push(if x > 0.0 {
                x * b.get(d - d1, w - w1)
            } else {
                0.0
            });
        }
    }
    pick(buf, rng).map(|i| (i / wl, i % wl))
}

impl BlobGf {
    fn sample<R: Rng + ?Sized>(
        &self,
        family: &OffspringFamily,
        d: usize,
        w: usize,
        rng: &mut R,
        types: &mut Vec<u16>,
        parents: &mut Vec<u32>,
    ) -> bool {
        types.clear();
        parents.clear();
        let mut buf = Vec::new();
        let mut targets: Vec<(usize, usize)> = Vec::new();
        // (type, parent, frontier target, weight target excluding own λ)
        let mut stack: Vec<(u16, u32, usize, usize)> = vec![(0, NO_PARENT, d, w)];
        while let Some((ty, p, d, w)) = stack.pop() {
            let id = types.len() as u32;
            types.push(ty);
            parents.push(p);
            if ty == 0 && p != NO_PARENT {
                continue;
            }
            let j = ty as usize;
            let groups = &self.groups[j];
            // Word group and type-0 count.
            buf.clear();
            let mut keys = Vec::new();
            for (g, wg) in groups.iter().enumerate() {
                for (c0, &xc) in wg.x_coeffs.iter().enumerate() {
                    if xc > 0.0 && c0 <= d {
                        keys.push((g, c0));
                        buf.push(xc * self.suffix[j][g][0].get(d - c0, w));
                    }
                }
            }
            let Some(k) = pick(&buf, rng) else {
                return false;
            };
            let (g, c0) = keys[k];
            let wg = &groups[g];
            let probs: Vec<f64> = wg.words[c0].iter().map(|&(_, p)| p).collect();
            let Some(wi) = pick(&probs, rng) else {
                return false;
            };
            let word = &family.law(j).support()[wg.words[c0][wi].0 as usize]
                .0
                .symbols;
            // Targets for the non-type-0 children, block by block.
            let (mut rd, mut rw) = (d - c0, w);
            let mut per_type: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.groups.len()];
            for (bk, &(s, c)) in wg.counts.iter().enumerate() {
                let Some((bd, bw)) = split(
                    &self.powers[s][c as usize],
                    &self.suffix[j][g][bk + 1],
                    rd,
                    rw,
                    rng,
                    &mut buf,
                ) else {
                    return false;
                };
                rd -= bd;
                rw -= bw;
                let (mut qd, mut qw) = (bd, bw);
                targets.clear();
                for i in (1..=c as usize).rev() {
                    let Some((xd, xw)) = split(
                        &self.powers[s][1],
                        &self.powers[s][i - 1],
                        qd,
                        qw,
                        rng,
                        &mut buf,
                    ) else {
                        return false;
                    };
                    qd -= xd;
                    qw -= xw;
                    targets.push((xd, xw));
                }
                per_type[s] = std::mem::take(&mut targets);
                per_type[s].reverse();
            }
            // Push children so that the first symbol is processed first.
            let mut next_of = vec![0usize; self.groups.len()];
            let mut kids: Vec<(u16, u32, usize, usize)> = Vec::with_capacity(word.len());
            for &sym in word {
                let s = sym as usize;
                if s == 0 {
                    kids.push((0, id, 1, 0));
                } else {
                    let (xd, xw) = per_type[s][next_of[s]];
                    next_of[s] += 1;
                    let own = self.lambda[s] as usize;
                    if xw < own {
                        return false;
                    }
                    kids.push((sym, id, xd, xw - own));
                }
            }
            stack.extend(kids.into_iter().rev());
        }
        true
    }
}

impl BlobTable {
    /// Iterates the blob generating-function fixed point from zero until the
    /// accounted mass reaches `required` (or stops improving).
    pub fn build(
        family: &OffspringFamily,
        frontier_cap: u32,
        weight_cap: u64,
        required: f64,
    ) -> Result<Self> {
        let t = family.num_types();
        let caps = Caps {
            d: frontier_cap as usize,
            w: weight_cap.min(u32::MAX as u64) as usize,
        };
        let groups: Vec<Vec<WordGroup>> = (0..t).map(|j| group_words(family, j)).collect();
        let lambda = family.lambda();
        let mut max_pow = vec![0u32; t];
        for g in &groups {
            for wg in g {
                for &(j, c) in &wg.counts {
                    max_pow[j] = max_pow[j].max(c);
                }
            }
        }

        let apply = |g: &[WordGroup], powers: &[Vec<Poly>], wshift: usize| -> Poly {
            let mut out = Poly::zero();
            for wg in g {
                let mut prod = Poly::one();
                for &(j, c) in &wg.counts {
                    prod = prod.mul(&powers[j][c as usize], caps);
                }
                for (c0, &p) in wg.x_coeffs.iter().enumerate() {
                    if p > 0.0 {
                        out.add_shifted(&prod, p, c0, wshift, caps);
                    }
                }
            }
            out.trim();
            out
        };

        let mut g_polys: Vec<Poly> = vec![Poly::zero(); t];
        let mut f0;
        let final_powers: Vec<Vec<Poly>>;
        let mut last = -1.0;
        let mut stalled = 0usize;
        let mut iterations = 0;
        const MAX_ITERS: usize = 100_000;
        loop {
            iterations += 1;
            let powers: Vec<Vec<Poly>> = (0..t)
                .map(|j| {
                    let mut v = vec![Poly::one()];
                    for c in 1..=max_pow[j] as usize {
                        let next = v[c - 1].mul(&g_polys[j], caps);
                        v.push(next);
                    }
                    v
                })
                .collect();
            f0 = apply(&groups[0], &powers, 0);
            if t == 1 {
                final_powers = powers;
                break;
            }
            // A chain of non-type-0 vertices can leave the mass unchanged for
            // up to t - 1 consecutive rounds before it grows again.
            if (f0.mass - last).abs() <= 1e-16 {
                stalled += 1;
            } else {
                stalled = 0;
            }
            if 1.0 - f0.mass <= 1e-13 || stalled > t || iterations >= MAX_ITERS {
                final_powers = powers;
                break;
            }
            last = f0.mass;
            g_polys = (0..t)
                .map(|j| {
                    if j == 0 {
                        Poly::zero()
                    } else {
                        apply(&groups[j], &powers, lambda[j] as usize)
                    }
                })
                .collect();
        }
        let coverage = f0.mass.min(1.0);
        if coverage < required {
            return Err(Error::TruncationTooCoarse { coverage, required });
        }
        let mut classes = Vec::new();
        for d in 0..f0.dl {
            for w in 0..f0.wl {
                let p = f0.get(d, w);
                if p > 0.0 {
                    classes.push(BlobClass {
                        frontier: d as u32,
                        weight: w as u64,
                        prob: p,
                    });
                }
            }
        }
        let suffix = groups
            .iter()
            .map(|gs| {
                gs.iter()
                    .map(|g| {
                        let mut v = vec![Poly::one()];
                        for &(s, c) in g.counts.iter().rev() {
                            let next = final_powers[s][c as usize].mul(v.last().unwrap(), caps);
                            v.push(next);
                        }
                        v.reverse();
                        v
                    })
                    .collect()
            })
            .collect();
        Ok(BlobTable {
            classes,
            coverage,
            frontier_cap,
            weight_cap,
            iterations,
            gf: BlobGf {
                lambda: lambda.to_vec(),
                groups,
                powers: final_powers,
                suffix,
            },
        })
    }

    /// Draws a blob of the given class from its exact conditional law by
    /// descending through the generating-function tables. Returns `false`
    /// (buffers unspecified) if the tables assign the class no mass.
    pub fn sample_class_blob<R: Rng + ?Sized>(
        &self,
        family: &OffspringFamily,
        frontier: u32,
        weight: u64,
        rng: &mut R,
        types: &mut Vec<u16>,
        parents: &mut Vec<u32>,
    ) -> bool {
        self.gf.sample(
            family,
            frontier as usize,
            weight as usize,
            rng,
            types,
            parents,
        )
    }

    pub fn prob(&self, frontier: u32, weight: u64) -> f64 {
        self.classes
            .iter()
            .find(|c| c.frontier == frontier && c.weight == weight)
            .map_or(0.0, |c| c.prob)
    }

    /// Marginal law of the frontier size, P(ξ̃₁ = d), over the table.
    pub fn frontier_law(&self) -> Vec<f64> {
        let dmax = self.classes.iter().map(|c| c.frontier).max().unwrap_or(0) as usize;
        let mut v = vec![0.0; dmax + 1];
        for c in &self.classes {
            v[c.frontier as usize] += c.prob;
        }
        v
    }
}

/// Samples blobs size-biased by their frontier, with a uniformly marked
/// frontier leaf, via the harmonic function h(j) = expected frontier size
/// below a type-j vertex.
#[derive(Clone, Debug)]
pub struct SizeBiasedBlobSampler {
    cf: CompiledFamily,
    h: Vec<f64>,
    biased: Vec<Option<WeightedAliasIndex<f64>>>,
}

impl SizeBiasedBlobSampler {
    pub fn new(family: &OffspringFamily) -> Result<Self> {
        let t = family.num_types();
        let a = mean_matrix(family);
        let mut h = vec![1.0; t];
        if t > 1 {
            let m = t - 1;
            let n = DMatrix::from_fn(
                m,
                m,
                |i, j| if i == j { 1.0 } else { 0.0 } - a[(i + 1, j + 1)],
            );
            let rhs = DVector::from_fn(m, |i, _| a[(i + 1, 0)]);
            let sol = n
                .lu()
                .solve(&rhs)
                .ok_or(Error::SingularSubcriticalBlock { radius: 1.0 })?;
            for i in 0..m {
                h[i + 1] = sol[i];
            }
        }
        let biased = (0..t)
            .map(|ty| {
                let weights: Vec<f64> = family
                    .law(ty)
                    .support()
                    .iter()
                    .map(|(w, p)| p * w.symbols.iter().map(|&s| h[s as usize]).sum::<f64>())
                    .collect();
                if weights.iter().all(|&x| x <= 0.0) {
                    None
                } else {
                    WeightedAliasIndex::new(weights).ok()
                }
            })
            .collect();
        Ok(SizeBiasedBlobSampler {
            cf: CompiledFamily::new(family),
            h,
            biased,
        })
    }

    /// Expected frontier size below a vertex of each type (1 for type 0).
    pub fn harmonic(&self) -> &[f64] {
        &self.h
    }

    /// A size-biased blob and the local index of its marked frontier leaf.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, max_size: usize) -> Result<(Blob, usize)> {
        let mut b = Blob::default();
        // (type, parent, marked)
        let mut stack: Vec<(u16, u32, bool)> = vec![(0, NO_PARENT, true)];
        let mut mark = usize::MAX;
        while let Some((ty, p, marked)) = stack.pop() {
            let id = b.types.len() as u32;
            b.types.push(ty);
            b.parents.push(p);
            if ty == 0 && p != NO_PARENT {
                if marked {
                    mark = id as usize;
                }
                continue;
            }
            let (word, pos) = if marked {
                let alias = self.biased[ty as usize].as_ref().ok_or_else(|| {
                    Error::InvalidFamily("no type-1 descendants to size-bias".into())
                })?;
                let wi = alias.sample(rng);
                let w = self.cf.word(ty as usize, wi);
                let total: f64 = w.iter().map(|&s| self.h[s as usize]).sum();
                let mut u = rng.random::<f64>() * total;
                let mut pos = w.len() - 1;
                for (i, &s) in w.iter().enumerate() {
                    u -= self.h[s as usize];
                    if u < 0.0 {
                        pos = i;
                        break;
                    }
                }
                (w, pos)
            } else {
                (self.cf.sample_word(ty as usize, rng), usize::MAX)
            };
            if b.types.len() + stack.len() + word.len() > max_size {
                return Err(Error::Overflow {
                    max_vertices: max_size,
                });
            }
            for (i, &s) in word.iter().enumerate().rev() {
                stack.push((s, id, i == pos));
            }
        }
        debug_assert!(mark != usize::MAX);
        Ok((b, mark))
    }
}
