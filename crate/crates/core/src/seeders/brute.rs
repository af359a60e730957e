//! Exhaustive search over budget-respecting seedings. Small instances only.

use rayon::prelude::*;

use super::Budget;
use crate::diffusion::{estimate_unchecked, DEFAULT_MAX_STEPS};
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::instance::{GeneralInstance, Seeding};
use crate::maxmax::{all_singletons, SimplifiedInstance};
use crate::rng::RngHandle;

pub const DEFAULT_BRUTE_FORCE_CAP: u128 = 2_000_000;

/// A set function over seedings.
pub trait Objective: Sync {
    fn node_count(&self) -> usize;
    fn source_count(&self) -> usize;
    fn value(&self, seeding: &Seeding) -> f64;
}

/// Union coverage on a max-max instance, with every `γ` precomputed.
pub struct MaxMaxObjective {
    n: usize,
    k: usize,
    gamma: Vec<Vec<u32>>,
}

impl MaxMaxObjective {
    pub fn new(sinst: &SimplifiedInstance) -> Self {
        MaxMaxObjective {
            n: sinst.node_count(),
            k: sinst.source_count(),
            gamma: all_singletons(sinst),
        }
    }
}

impl Objective for MaxMaxObjective {
    fn node_count(&self) -> usize {
        self.n
    }

    fn source_count(&self) -> usize {
        self.k
    }

    fn value(&self, seeding: &Seeding) -> f64 {
        let mut covered = vec![false; self.n];
        for (u, k) in seeding.pairs() {
            for &w in &self.gamma[u.index() * self.k + k] {
                covered[w as usize] = true;
            }
        }
        covered.iter().filter(|&&c| c).count() as f64
    }
}

/// Estimated coverage in the general model. Every seeding is evaluated on
/// the same replication streams.
pub struct GeneralObjective<'a> {
    pub inst: &'a GeneralInstance,
    pub replications: usize,
    pub rng: RngHandle,
    pub max_steps: usize,
}

impl<'a> GeneralObjective<'a> {
    pub fn new(inst: &'a GeneralInstance, replications: usize, rng: RngHandle) -> Self {
        GeneralObjective {
            inst,
            replications,
            rng,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

impl Objective for GeneralObjective<'_> {
    fn node_count(&self) -> usize {
        self.inst.node_count()
    }

    fn source_count(&self) -> usize {
        self.inst.source_count()
    }

    fn value(&self, seeding: &Seeding) -> f64 {
        estimate_unchecked(self.inst, seeding, self.replications, &self.rng, self.max_steps).mean
    }
}

fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

fn subsets_up_to(n: usize, b: usize) -> u128 {
    (0..=b.min(n)).fold(0u128, |a, j| a.saturating_add(binomial(n, j)))
}

/// Number of seedings the exhaustive search would evaluate.
pub fn seeding_count(n: usize, k: usize, budget: &Budget) -> u128 {
    match budget {
        Budget::PerSource(b) => b.iter().fold(1u128, |a, &bk| a.saturating_mul(subsets_up_to(n, bk))),
        Budget::Total(b) => subsets_up_to(n * k, *b),
    }
}

/// Visits all subsets of `0..m` with at most `max` elements, by size then
/// lexicographically.
fn for_each_subset(m: usize, max: usize, mut f: impl FnMut(&[usize])) {
    for r in 0..=max.min(m) {
        let mut c: Vec<usize> = (0..r).collect();
        loop {
            f(&c);
            // advance to the next r-combination
            let mut i = r;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if c[i] < m - r + i {
                    c[i] += 1;
                    for j in i + 1..r {
                        c[j] = c[j - 1] + 1;
                    }
                    i = usize::MAX;
                    break;
                }
            }
            if i != usize::MAX {
                break;
            }
        }
    }
}

const BATCH: usize = 4096;

struct Best {
    seeding: Option<Seeding>,
    value: f64,
    batch: Vec<Seeding>,
}

impl Best {
    fn push(&mut self, obj: &dyn Objective, s: Seeding) {
        self.batch.push(s);
        if self.batch.len() == BATCH {
            self.flush(obj);
        }
    }

    fn flush(&mut self, obj: &dyn Objective) {
        let batch = std::mem::take(&mut self.batch);
        let values: Vec<f64> = batch.par_iter().map(|s| obj.value(s)).collect();
        for (s, v) in batch.into_iter().zip(values) {
            // first maximum in enumeration order wins
            if self.seeding.is_none() || v > self.value {
                self.seeding = Some(s);
                self.value = v;
            }
        }
    }
}

/// Exact maximizer of `obj` over every seeding within `budget`, including
/// seedings that leave budget unused. Refuses when more than `cap`
/// seedings would be evaluated.
pub fn brute_force<O: Objective>(obj: &O, budget: &Budget, cap: u128) -> Result<(Seeding, f64)> {
    let n = obj.node_count();
    let k = obj.source_count();
    let count = seeding_count(n, k, budget);
    if count > cap {
        return Err(Error::CombinatorialCap { count, cap });
    }
    let mut best = Best {
        seeding: None,
        value: f64::NEG_INFINITY,
        batch: Vec::with_capacity(BATCH),
    };
    match budget {
        Budget::Total(b) => {
            for_each_subset(n * k, *b, |pairs| {
                let mut s = Seeding::empty(k);
                for &p in pairs {
                    s.insert(p % k, NodeId::from(p / k));
                }
                best.push(obj, s);
            });
        }
        Budget::PerSource(b) => {
            if b.len() != k {
                return Err(Error::SourceCountMismatch {
                    expected: k,
                    got: b.len(),
                });
            }
            let options: Vec<Vec<Vec<NodeId>>> = b
                .iter()
                .map(|&bk| {
                    let mut all = Vec::new();
                    for_each_subset(n, bk, |c| all.push(c.iter().map(|&u| NodeId::from(u)).collect()));
                    all
                })
                .collect();
            let mut idx = vec![0usize; k];
            loop {
                let sets = (0..k).map(|j| options[j][idx[j]].clone()).collect();
                best.push(obj, Seeding::from_sets(sets));
                // odometer, last source fastest
                let mut j = k;
                loop {
                    if j == 0 {
                        break;
                    }
                    j -= 1;
                    idx[j] += 1;
                    if idx[j] < options[j].len() {
                        j = usize::MAX;
                        break;
                    }
                    idx[j] = 0;
                }
                if j != usize::MAX {
                    break;
                }
            }
        }
    }
    best.flush(obj);
    Ok((best.seeding.unwrap_or_else(|| Seeding::empty(k)), best.value))
}
