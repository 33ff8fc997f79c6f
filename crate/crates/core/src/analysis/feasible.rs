//! Achievable λ-weighted sizes of finite trees.

use serde::Serialize;

use crate::kernel::OffspringFamily;

/// Feasible sizes up to a bound and their detected lattice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FeasibleSizes {
    pub bound: u64,
    /// Sorted feasible values of `#_λ` in `0..=bound` for trees rooted at type 0.
    pub sizes: Vec<u64>,
    /// Smallest feasible size, if any.
    pub offset: Option<u64>,
    /// gcd of differences between feasible sizes (0 with fewer than two).
    pub period: u64,
    /// Set when the fixpoint was cut off before stabilizing.
    pub provisional: bool,
}

impl FeasibleSizes {
    pub fn contains(&self, n: u64) -> bool {
        self.sizes.binary_search(&n).is_ok()
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, PartialEq, Eq)]
struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    fn new(len: usize) -> Self {
        Bits {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    fn or_shifted(&mut self, other: &Bits, shift: usize) {
        let (q, r) = (shift / 64, shift % 64);
        let n = self.words.len();
        for i in (q..n).rev() {
            let lo = other.words[i - q] << r;
            let hi = if r > 0 && i > q {
                other.words[i - q - 1] >> (64 - r)
            } else {
                0
            };
            self.words[i] |= lo | hi;
        }
        self.mask();
    }

    fn mask(&mut self) {
        let extra = self.words.len() * 64 - self.len;
        if extra > 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= u64::MAX >> extra;
            }
        }
    }

    /// Sumset with `other`, truncated to the common length.
    fn sum(&self, other: &Bits) -> Bits {
        let mut out = Bits::new(self.len);
        for x in self.ones() {
            out.or_shifted(other, x);
        }
        out
    }
}

/// Least fixpoint of `S_j = {λ_j + Σ_{s ∈ w} x_s : w ∈ supp ζ_j, x_s ∈ S_s}`
/// within `0..=bound`. Every value of a finite tree appears after finitely
/// many rounds and the sets only grow, so the iteration is exact once it
/// stops changing; nonnegative weights keep truncated values out of range.
pub fn feasible_sizes(family: &OffspringFamily, bound: u64) -> FeasibleSizes {
    let t = family.num_types();
    let len = bound as usize + 1;
    let lambda = family.lambda();
    // Distinct child-count vectors per parent type.
    let shapes: Vec<Vec<Vec<u32>>> = (0..t)
        .map(|j| {
            let mut v: Vec<Vec<u32>> = family
                .law(j)
                .support()
                .iter()
                .map(|(w, _)| w.counts(t))
                .collect();
            v.sort();
            v.dedup();
            v
        })
        .collect();
    let max_count: Vec<u32> = (0..t)
        .map(|s| shapes.iter().flatten().map(|c| c[s]).max().unwrap_or(0))
        .collect();
    let mut sets: Vec<Bits> = vec![Bits::new(len); t];
    loop {
        // powers[s][c] = c-fold sumset of S_s.
        let powers: Vec<Vec<Bits>> = (0..t)
            .map(|s| {
                let mut zero = Bits::new(len);
                zero.set(0);
                let mut v = vec![zero];
                for c in 1..=max_count[s] as usize {
                    let next = v[c - 1].sum(&sets[s]);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut changed = false;
        for j in 0..t {
            if lambda[j] as usize >= len {
                continue;
            }
            let mut next = sets[j].clone();
            for counts in &shapes[j] {
                let mut acc = Bits::new(len);
                acc.set(lambda[j] as usize);
                for (s, &c) in counts.iter().enumerate() {
                    if c > 0 {
                        acc = acc.sum(&powers[s][c as usize]);
                        if acc.is_empty() {
                            break;
                        }
                    }
                }
                for (a, b) in next.words.iter_mut().zip(&acc.words) {
                    *a |= b;
                }
            }
            if next != sets[j] {
                sets[j] = next;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let sizes: Vec<u64> = sets[0].ones().map(|x| x as u64).collect();
    let offset = sizes.first().copied();
    let period = match offset {
        Some(o) => sizes.iter().fold(0, |g, &x| gcd(g, x - o)),
        None => 0,
    };
    FeasibleSizes {
        bound,
        sizes,
        offset,
        period,
        provisional: false,
    }
}

pub fn is_feasible(family: &OffspringFamily, n: u64) -> bool {
    feasible_sizes(family, n).contains(n)
}
