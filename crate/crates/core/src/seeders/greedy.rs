//! Greedy selection on max-max instances.
//!
//! [`greedy_maxmax`] is the textbook loop: precompute every singleton
//! coverage set, then repeatedly take the pair with the largest number of
//! not-yet-covered nodes. [`greedy_lazy_hybrid`] produces the same seeding
//! without storing the sets up front. It keeps marginal gains in a max-heap
//! and only recomputes the top entry when it is stale (stale gains are upper
//! bounds because coverage is submodular). Once enough of the reachable
//! nodes are covered it switches to an inverted index `δ(w)` of the pairs
//! that would cover `w`, and maintains the gains `N` by decrements.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::Budget;
use crate::graph::NodeId;
use crate::instance::Seeding;
use crate::maxmax::{all_singletons, CoverageSearch, SimplifiedInstance};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GreedyStats {
    /// Gated max-product searches run.
    pub singleton_searches: usize,
    /// Marginal gains `|γ(u,k) \ C|` computed from scratch.
    pub gain_evaluations: usize,
    /// Gain decrements applied through `δ`.
    pub decrements: usize,
    /// Number of picks made before `δ` was materialized, if it was.
    pub materialized_after: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreedyResult {
    pub seeding: Seeding,
    /// `|C|`, the coverage of the seeding in the max-max instance.
    pub covered: usize,
    pub stats: GreedyStats,
}

/// Plain greedy. Ties go to the lower node id, then the lower source id.
pub fn greedy_maxmax(sinst: &SimplifiedInstance, budget: &Budget) -> GreedyResult {
    let n = sinst.node_count();
    let k = sinst.source_count();
    let gamma = all_singletons(sinst);
    let mut stats = GreedyStats {
        singleton_searches: gamma.len(),
        ..Default::default()
    };
    let mut covered = vec![false; n];
    let mut covered_count = 0;
    let mut selected = vec![false; n * k];
    let mut used = vec![0usize; k];
    let mut seeding = Seeding::empty(k);

    while !budget.exhausted(&used) && covered_count < n {
        let mut best: Option<(usize, usize)> = None;
        for p in 0..n * k {
            if selected[p] || !budget.can_add(p % k, &used) {
                continue;
            }
            let gain = gamma[p].iter().filter(|&&w| !covered[w as usize]).count();
            stats.gain_evaluations += 1;
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((p, gain));
            }
        }
        let Some((p, _)) = best else { break };
        selected[p] = true;
        used[p % k] += 1;
        seeding.insert(p % k, NodeId::from(p / k));
        for &w in &gamma[p] {
            if !covered[w as usize] {
                covered[w as usize] = true;
                covered_count += 1;
            }
        }
    }
    GreedyResult {
        seeding,
        covered: covered_count,
        stats,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HybridOptions {
    /// Materialize `δ` once `|C|` reaches this fraction of the nodes reachable
    /// from any pair. `0.0` materializes immediately, `>= 1.0` never.
    pub switch_fraction: f64,
}

impl Default for HybridOptions {
    fn default() -> Self {
        HybridOptions { switch_fraction: 0.25 }
    }
}

#[derive(Copy, Clone, PartialEq, Eq)]
struct Entry {
    gain: usize,
    pair: usize,
    stamp: usize,
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain.cmp(&other.gain).then_with(|| other.pair.cmp(&self.pair))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Mutable state shared by both phases of the hybrid greedy.
struct GreedyWorkspace<'a> {
    sinst: &'a SimplifiedInstance,
    budget: &'a Budget,
    k: usize,
    covered: Vec<bool>,
    covered_count: usize,
    selected: Vec<bool>,
    used: Vec<usize>,
    picks: usize,
    seeding: Seeding,
    search: CoverageSearch,
    buf: Vec<u32>,
    stats: GreedyStats,
}

impl GreedyWorkspace<'_> {
    fn done(&self) -> bool {
        self.budget.exhausted(&self.used) || self.covered_count >= self.covered.len()
    }

    fn available(&self, p: usize) -> bool {
        !self.selected[p] && self.budget.can_add(p % self.k, &self.used)
    }

    fn gain(&mut self, p: usize) -> usize {
        self.search.run(self.sinst, p / self.k, p % self.k, &mut self.buf);
        self.stats.singleton_searches += 1;
        self.stats.gain_evaluations += 1;
        self.buf.iter().filter(|&&w| !self.covered[w as usize]).count()
    }

    /// Records the pick; returns the newly covered nodes via `self.buf`.
    fn select(&mut self, p: usize, coverage: &[u32]) -> Vec<u32> {
        let k = self.k;
        self.selected[p] = true;
        self.used[p % k] += 1;
        self.seeding.insert(p % k, NodeId::from(p / k));
        self.picks += 1;
        let mut fresh = Vec::new();
        for &w in coverage {
            if !self.covered[w as usize] {
                self.covered[w as usize] = true;
                self.covered_count += 1;
                fresh.push(w);
            }
        }
        fresh
    }
}

/// Lazy-evaluation greedy with a late switch to inverted coverage lists.
/// Produces exactly the seeding of [`greedy_maxmax`].
pub fn greedy_lazy_hybrid(sinst: &SimplifiedInstance, budget: &Budget, opts: &HybridOptions) -> GreedyResult {
    let n = sinst.node_count();
    let k = sinst.source_count();
    let pairs = n * k;

    // initial gains are plain set sizes; also find every reachable node
    const CHUNK: usize = 512;
    let chunks: Vec<(Vec<usize>, Vec<bool>)> = (0..pairs.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut search = CoverageSearch::new(n);
            let mut buf = Vec::new();
            let mut reach = vec![false; n];
            let sizes = (c * CHUNK..((c + 1) * CHUNK).min(pairs))
                .map(|p| {
                    search.run(sinst, p / k, p % k, &mut buf);
                    for &w in &buf {
                        reach[w as usize] = true;
                    }
                    buf.len()
                })
                .collect();
            (sizes, reach)
        })
        .collect();
    let mut reachable = vec![false; n];
    let mut heap = BinaryHeap::with_capacity(pairs);
    for (c, (sizes, reach)) in chunks.into_iter().enumerate() {
        for (i, gain) in sizes.into_iter().enumerate() {
            heap.push(Entry {
                gain,
                pair: c * CHUNK + i,
                stamp: 0,
            });
        }
        for (r, x) in reachable.iter_mut().zip(reach) {
            *r |= x;
        }
    }
    let reachable = reachable.iter().filter(|&&r| r).count();

    let mut ws = GreedyWorkspace {
        sinst,
        budget,
        k,
        covered: vec![false; n],
        covered_count: 0,
        selected: vec![false; pairs],
        used: vec![0; k],
        picks: 0,
        seeding: Seeding::empty(k),
        search: CoverageSearch::new(n),
        buf: Vec::new(),
        stats: GreedyStats {
            singleton_searches: pairs,
            gain_evaluations: pairs,
            ..Default::default()
        },
    };

    let switch_at = if opts.switch_fraction >= 1.0 {
        None
    } else {
        Some((opts.switch_fraction.max(0.0) * reachable as f64).ceil() as usize)
    };

    // phase 1: lazy heap
    while !ws.done() {
        if switch_at.is_some_and(|s| ws.covered_count >= s) {
            materialized_phase(&mut ws);
            break;
        }
        let Some(top) = heap.pop() else { break };
        if !ws.available(top.pair) {
            continue;
        }
        if top.stamp == ws.picks {
            ws.search.run(sinst, top.pair / k, top.pair % k, &mut ws.buf);
            ws.stats.singleton_searches += 1;
            let coverage = std::mem::take(&mut ws.buf);
            ws.select(top.pair, &coverage);
            ws.buf = coverage;
        } else {
            let gain = ws.gain(top.pair);
            heap.push(Entry {
                gain,
                pair: top.pair,
                stamp: ws.picks,
            });
        }
    }

    GreedyResult {
        seeding: ws.seeding,
        covered: ws.covered_count,
        stats: ws.stats,
    }
}

/// Phase 2: exact gains `N` kept current through `δ`.
fn materialized_phase(ws: &mut GreedyWorkspace<'_>) {
    let n = ws.covered.len();
    let k = ws.k;
    ws.stats.materialized_after = Some(ws.picks);

    let candidates: Vec<usize> = (0..n * k).filter(|&p| ws.available(p)).collect();
    let sinst = ws.sinst;
    let covered = &ws.covered;
    let uncovered: Vec<Vec<u32>> = candidates
        .par_iter()
        .map_init(
            || (CoverageSearch::new(n), Vec::new()),
            |(search, buf), &p| {
                search.run(sinst, p / k, p % k, buf);
                buf.iter().copied().filter(|&w| !covered[w as usize]).collect()
            },
        )
        .collect();
    ws.stats.singleton_searches += candidates.len();
    ws.stats.gain_evaluations += candidates.len();

    let mut gains: Vec<usize> = uncovered.iter().map(Vec::len).collect();
    let mut delta: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (ci, set) in uncovered.iter().enumerate() {
        for &w in set {
            delta[w as usize].push(ci as u32);
        }
    }
    let mut taken = vec![false; candidates.len()];

    while !ws.done() {
        let mut best: Option<usize> = None;
        for (ci, &p) in candidates.iter().enumerate() {
            if taken[ci] || !ws.budget.can_add(p % k, &ws.used) {
                continue;
            }
            if best.is_none_or(|b| gains[ci] > gains[b]) {
                best = Some(ci);
            }
        }
        let Some(ci) = best else { break };
        taken[ci] = true;
        let fresh = ws.select(candidates[ci], &uncovered[ci]);
        for w in fresh {
            for &cj in &delta[w as usize] {
                gains[cj as usize] -= 1;
                ws.stats.decrements += 1;
            }
        }
    }
}
