//! Instances of the general diffusion model, seedings, and validation.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, TrustGraph};

/// Trust a node places in a source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeTrust {
    Uniform(f64),
    PerNode(Vec<f64>),
}

impl NodeTrust {
    #[inline]
    pub fn get(&self, u: usize) -> f64 {
        match self {
            NodeTrust::Uniform(a) => *a,
            NodeTrust::PerNode(v) => v[u],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub info_value: f64,
    pub budget: usize,
    pub node_trust: NodeTrust,
}

impl SourceSpec {
    pub fn uniform(info_value: f64, budget: usize, trust: f64) -> Self {
        SourceSpec {
            info_value,
            budget,
            node_trust: NodeTrust::Uniform(trust),
        }
    }

    /// Value a seeded node `u` receives directly from this source.
    #[inline]
    pub fn seed_value(&self, u: usize) -> f64 {
        self.node_trust.get(u) * self.info_value
    }
}

/// Lower and upper belief thresholds of one node.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeProfile {
    pub t_low: f64,
    pub t_high: f64,
}

impl NodeProfile {
    pub fn new(t_low: f64, t_high: f64) -> Self {
        NodeProfile { t_low, t_high }
    }

    pub fn single(t: f64) -> Self {
        NodeProfile { t_low: t, t_high: t }
    }
}

/// Number of rounds a believer keeps broadcasting before it leaves.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvacuationDelay {
    Steps(u32),
    Never,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralInstance {
    pub graph: Arc<TrustGraph>,
    pub profiles: Vec<NodeProfile>,
    pub sources: Vec<SourceSpec>,
    pub lambda_d: f64,
    pub lambda_s: f64,
    pub tau: EvacuationDelay,
    pub transmit_p: f64,
}

impl GeneralInstance {
    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn source_count(&self) -> usize {
        self.sources.len()
    }

    pub fn budgets(&self) -> Vec<usize> {
        self.sources.iter().map(|s| s.budget).collect()
    }

    pub fn total_budget(&self) -> usize {
        self.sources.iter().map(|s| s.budget).sum()
    }

    pub fn min_t_low(&self) -> f64 {
        self.profiles.iter().map(|p| p.t_low).fold(f64::INFINITY, f64::min)
    }

    pub fn max_t_high(&self) -> f64 {
        self.profiles.iter().map(|p| p.t_high).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Per-source seed sets. Each set is kept sorted and duplicate free; the
/// same node may appear under several sources.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seeding {
    sets: Vec<Vec<NodeId>>,
}

impl Seeding {
    pub fn empty(sources: usize) -> Self {
        Seeding {
            sets: vec![Vec::new(); sources],
        }
    }

    pub fn from_sets(sets: Vec<Vec<NodeId>>) -> Self {
        let sets = sets
            .into_iter()
            .map(|mut s| {
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();
        Seeding { sets }
    }

    pub fn single(nodes: impl IntoIterator<Item = usize>) -> Self {
        Seeding::from_sets(vec![nodes.into_iter().map(NodeId::from).collect()])
    }

    pub fn source_count(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[Vec<NodeId>] {
        &self.sets
    }

    pub fn set(&self, k: usize) -> &[NodeId] {
        &self.sets[k]
    }

    /// Inserts `u` into source `k`'s set. Returns false if it was present.
    pub fn insert(&mut self, k: usize, u: NodeId) -> bool {
        match self.sets[k].binary_search(&u) {
            Ok(_) => false,
            Err(pos) => {
                self.sets[k].insert(pos, u);
                true
            }
        }
    }

    pub fn contains(&self, k: usize, u: NodeId) -> bool {
        self.sets[k].binary_search(&u).is_ok()
    }

    /// Number of (node, source) pairs.
    pub fn total(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    /// Sorted union of all sets.
    pub fn merged(&self) -> Vec<NodeId> {
        let mut all: Vec<NodeId> = self.sets.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    pub fn pairs(&self) -> impl Iterator<Item = (NodeId, usize)> + '_ {
        self.sets
            .iter()
            .enumerate()
            .flat_map(|(k, s)| s.iter().map(move |&u| (u, k)))
    }

    /// Checks source count, node range and `|ψ_k| ≤ B_k`.
    pub fn check(&self, n: usize, budgets: &[usize]) -> Result<()> {
        if self.sets.len() != budgets.len() {
            return Err(Error::SourceCountMismatch {
                expected: budgets.len(),
                got: self.sets.len(),
            });
        }
        for (k, (set, &b)) in self.sets.iter().zip(budgets).enumerate() {
            if set.len() > b {
                return Err(Error::BudgetViolation {
                    source_index: k,
                    used: set.len(),
                    budget: b,
                });
            }
            if let Some(u) = set.iter().find(|u| u.index() >= n) {
                return Err(Error::NodeOutOfRange { node: u.index(), n });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Subject {
    Arc { index: usize, src: NodeId, dst: NodeId },
    Node(NodeId),
    Source(usize),
    Instance,
}

/// One broken invariant found by [`validate_instance`].
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub subject: Subject,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.subject {
            Subject::Arc { index, src, dst } => {
                write!(f, "arc #{index} ({src} -> {dst}): {}", self.rule)
            }
            Subject::Node(u) => write!(f, "node {u}: {}", self.rule),
            Subject::Source(k) => write!(f, "source {k}: {}", self.rule),
            Subject::Instance => write!(f, "instance: {}", self.rule),
        }
    }
}

fn unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

/// Reports every invariant violation in `inst`. Empty means valid.
pub fn validate_instance(inst: &GeneralInstance) -> Vec<Violation> {
    let mut out = validate_graph(&inst.graph);
    let n = inst.graph.node_count();
    let mut push = |subject, rule: String| out.push(Violation { subject, rule });

    if inst.profiles.len() != n {
        push(
            Subject::Instance,
            format!("{} profiles for {n} nodes", inst.profiles.len()),
        );
    }
    for (u, p) in inst.profiles.iter().enumerate() {
        let node = Subject::Node(NodeId::from(u));
        if !(p.t_low >= 0.0 && p.t_low.is_finite()) {
            push(node.clone(), format!("t_l = {} must be finite and >= 0", p.t_low));
        }
        if !(p.t_high >= 0.0 && p.t_high.is_finite()) {
            push(node.clone(), format!("t_h = {} must be finite and >= 0", p.t_high));
        }
        if p.t_low > p.t_high {
            push(node, format!("t_l = {} exceeds t_h = {}", p.t_low, p.t_high));
        }
    }

    if inst.sources.is_empty() {
        push(Subject::Instance, "at least one source is required".into());
    }
    for (k, s) in inst.sources.iter().enumerate() {
        if !(s.info_value >= 0.0 && s.info_value.is_finite()) {
            push(
                Subject::Source(k),
                format!("information value {} must be finite and >= 0", s.info_value),
            );
        }
        match &s.node_trust {
            NodeTrust::Uniform(a) => {
                if !unit(*a) {
                    push(Subject::Source(k), format!("node trust {a} outside [0, 1]"));
                }
            }
            NodeTrust::PerNode(v) => {
                if v.len() != n {
                    push(Subject::Source(k), format!("{} per-node trusts for {n} nodes", v.len()));
                }
                for (u, a) in v.iter().enumerate() {
                    if !unit(*a) {
                        push(Subject::Source(k), format!("trust of node {u} is {a}, outside [0, 1]"));
                    }
                }
            }
        }
    }

    for (name, x) in [
        ("lambda_d", inst.lambda_d),
        ("lambda_s", inst.lambda_s),
        ("transmit_p", inst.transmit_p),
    ] {
        if !unit(x) {
            push(Subject::Instance, format!("{name} = {x} outside [0, 1]"));
        }
    }
    if inst.tau == EvacuationDelay::Steps(0) {
        push(Subject::Instance, "tau must be positive".into());
    }
    out
}

/// Graph-level checks: trust bounds, self-arcs, duplicate arcs, symmetry flag.
pub fn validate_graph(g: &TrustGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = HashSet::with_capacity(g.arc_count());
    for (index, a) in g.arcs().iter().enumerate() {
        let subject = Subject::Arc {
            index,
            src: a.src,
            dst: a.dst,
        };
        if !unit(a.trust) {
            out.push(Violation {
                subject: subject.clone(),
                rule: format!("trust {} outside [0, 1]", a.trust),
            });
        }
        if a.src == a.dst {
            out.push(Violation {
                subject: subject.clone(),
                rule: "self-arc".into(),
            });
        }
        if !seen.insert((a.src, a.dst)) {
            out.push(Violation {
                subject,
                rule: "duplicate arc for this ordered pair".into(),
            });
        }
    }
    if g.is_symmetric() {
        let trust: std::collections::HashMap<(NodeId, NodeId), f64> =
            g.arcs().iter().map(|a| ((a.src, a.dst), a.trust)).collect();
        for (index, a) in g.arcs().iter().enumerate() {
            match trust.get(&(a.dst, a.src)) {
                Some(t) if t.to_bits() == a.trust.to_bits() => {}
                Some(t) => out.push(Violation {
                    subject: Subject::Arc {
                        index,
                        src: a.src,
                        dst: a.dst,
                    },
                    rule: format!("graph marked undirected but reverse trust is {t}"),
                }),
                None => out.push(Violation {
                    subject: Subject::Arc {
                        index,
                        src: a.src,
                        dst: a.dst,
                    },
                    rule: "graph marked undirected but reverse arc is missing".into(),
                }),
            }
        }
    }
    out
}
