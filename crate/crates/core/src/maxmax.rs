//! Deterministic max-max model: `λ_d = λ_s = 0`, a single threshold per node,
//! no evacuation, reliable transmission.
//!
//! In this model the converted set of a seeding is the union of the
//! singleton coverage sets of its (node, source) pairs, which makes the
//! coverage function monotone and submodular.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, TrustGraph};
use crate::instance::{NodeTrust, Seeding, SourceSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Thresholds {
    Uniform(f64),
    PerNode(Vec<f64>),
}

impl Thresholds {
    #[inline]
    pub fn get(&self, u: usize) -> f64 {
        match self {
            Thresholds::Uniform(t) => *t,
            Thresholds::PerNode(v) => v[u],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplifiedInstance {
    pub graph: Arc<TrustGraph>,
    pub thresholds: Thresholds,
    pub sources: Vec<SourceSpec>,
}

impl SimplifiedInstance {
    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn source_count(&self) -> usize {
        self.sources.len()
    }

    pub fn budgets(&self) -> Vec<usize> {
        self.sources.iter().map(|s| s.budget).collect()
    }

    /// Number of (node, source) pairs; pair `u * K + k` is `(u, k)`.
    pub fn pair_count(&self) -> usize {
        self.node_count() * self.source_count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingletonCoverage {
    pub seed: (NodeId, usize),
    /// Sorted converted set `γ(u, k)`.
    pub converted: Vec<NodeId>,
}

#[derive(Copy, Clone, Debug, PartialEq)]
struct Frontier {
    value: f64,
    node: u32,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // larger value first, then smaller id
        self.value
            .total_cmp(&other.value)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reusable scratch space for gated max-product searches.
#[derive(Clone, Debug)]
pub struct CoverageSearch {
    best: Vec<f64>,
    epoch: Vec<u32>,
    settled: Vec<u32>,
    current: u32,
    heap: BinaryHeap<Frontier>,
}

impl CoverageSearch {
    pub fn new(n: usize) -> Self {
        CoverageSearch {
            best: vec![0.0; n],
            epoch: vec![0; n],
            settled: vec![0; n],
            current: 0,
            heap: BinaryHeap::new(),
        }
    }

    /// Writes `γ(u, k)` into `out` (unsorted, in settle order).
    pub fn run(&mut self, sinst: &SimplifiedInstance, u: usize, k: usize, out: &mut Vec<u32>) {
        out.clear();
        self.current = self.current.wrapping_add(1);
        if self.current == 0 {
            self.epoch.iter_mut().for_each(|e| *e = 0);
            self.settled.iter_mut().for_each(|e| *e = 0);
            self.current = 1;
        }
        let cur = self.current;
        let g = &*sinst.graph;
        let seed = sinst.sources[k].seed_value(u);
        self.heap.clear();
        self.best[u] = seed;
        self.epoch[u] = cur;
        self.heap.push(Frontier {
            value: seed,
            node: u as u32,
        });
        while let Some(Frontier { value, node }) = self.heap.pop() {
            let x = node as usize;
            if self.settled[x] == cur {
                continue;
            }
            self.settled[x] = cur;
            // nodes below their threshold absorb but never forward
            if value < sinst.thresholds.get(x) {
                continue;
            }
            out.push(node);
            for (w, trust) in g.out_arcs(x) {
                if self.settled[w] == cur {
                    continue;
                }
                let nv = value * trust;
                if self.epoch[w] != cur || nv > self.best[w] {
                    self.epoch[w] = cur;
                    self.best[w] = nv;
                    self.heap.push(Frontier {
                        value: nv,
                        node: w as u32,
                    });
                }
            }
        }
    }
}

pub fn singleton_coverage(sinst: &SimplifiedInstance, u: NodeId, k: usize) -> SingletonCoverage {
    let mut search = CoverageSearch::new(sinst.node_count());
    let mut out = Vec::new();
    search.run(sinst, u.index(), k, &mut out);
    out.sort_unstable();
    SingletonCoverage {
        seed: (u, k),
        converted: out.into_iter().map(NodeId).collect(),
    }
}

/// `γ` for every pair, indexed `u * K + k`. Parallel over pairs.
pub fn all_singletons(sinst: &SimplifiedInstance) -> Vec<Vec<u32>> {
    let n = sinst.node_count();
    let k = sinst.source_count();
    (0..n * k)
        .into_par_iter()
        .map_init(
            || CoverageSearch::new(n),
            |search, p| {
                let mut out = Vec::new();
                search.run(sinst, p / k, p % k, &mut out);
                out.sort_unstable();
                out
            },
        )
        .collect()
}

/// Size and members of `∪_k ∪_{x∈ψ_k} γ(x, k)`.
pub fn union_coverage(sinst: &SimplifiedInstance, seeding: &Seeding) -> (usize, Vec<NodeId>) {
    let n = sinst.node_count();
    let mut covered = vec![false; n];
    let mut search = CoverageSearch::new(n);
    let mut buf = Vec::new();
    for (u, k) in seeding.pairs() {
        search.run(sinst, u.index(), k, &mut buf);
        for &w in &buf {
            covered[w as usize] = true;
        }
    }
    let set: Vec<NodeId> = covered
        .iter()
        .enumerate()
        .filter(|(_, &c)| c)
        .map(|(u, _)| NodeId::from(u))
        .collect();
    (set.len(), set)
}

/// Merges `K` identical sources into one with the summed budget.
pub fn collapse_identical_sources(sinst: &SimplifiedInstance) -> Result<SimplifiedInstance> {
    let first = sinst
        .sources
        .first()
        .ok_or_else(|| Error::param("instance has no sources"))?;
    let n = sinst.node_count();
    for (k, s) in sinst.sources.iter().enumerate().skip(1) {
        if s.info_value != first.info_value {
            return Err(Error::NonIdenticalSources(format!(
                "source {k} has value {} but source 0 has {}",
                s.info_value, first.info_value
            )));
        }
        if let Some(u) = (0..n).find(|&u| s.node_trust.get(u) != first.node_trust.get(u)) {
            return Err(Error::NonIdenticalSources(format!(
                "node {u} trusts source {k} differently from source 0"
            )));
        }
    }
    let node_trust = match &first.node_trust {
        NodeTrust::Uniform(a) => NodeTrust::Uniform(*a),
        NodeTrust::PerNode(v) => NodeTrust::PerNode(v.clone()),
    };
    Ok(SimplifiedInstance {
        graph: Arc::clone(&sinst.graph),
        thresholds: sinst.thresholds.clone(),
        sources: vec![SourceSpec {
            info_value: first.info_value,
            budget: sinst.sources.iter().map(|s| s.budget).sum(),
            node_trust,
        }],
    })
}
