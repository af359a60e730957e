//! Directed trust-weighted graph with group labels.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node index in `0..n`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrustArc {
    pub src: NodeId,
    pub dst: NodeId,
    pub trust: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    symmetric: bool,
    groups: Vec<u32>,
    arcs: Vec<TrustArc>,
}

/// Sparse directed graph. `trust(u -> w)` is how much `w` trusts what `u`
/// tells it.
///
/// The arc list is kept in insertion order (this is what serializes); the
/// out- and in-adjacency views are CSR arrays ordered by endpoint, stable with
/// respect to the arc list.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct TrustGraph {
    n: usize,
    symmetric: bool,
    groups: Vec<u32>,
    arcs: Vec<TrustArc>,

    out_offsets: Vec<usize>,
    out_targets: Vec<u32>,
    out_trust: Vec<f64>,
    // position of each out-arc inside the in-adjacency of its target
    out_slot: Vec<usize>,

    in_offsets: Vec<usize>,
    in_sources: Vec<u32>,
    in_trust: Vec<f64>,
}

impl PartialEq for TrustGraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.symmetric == other.symmetric
            && self.groups == other.groups
            && self.arcs.len() == other.arcs.len()
            && self
                .arcs
                .iter()
                .zip(&other.arcs)
                .all(|(a, b)| a.src == b.src && a.dst == b.dst && a.trust.to_bits() == b.trust.to_bits())
    }
}

impl TryFrom<GraphRepr> for TrustGraph {
    type Error = Error;

    fn try_from(r: GraphRepr) -> Result<Self> {
        TrustGraph::new(r.n, r.arcs, r.groups, r.symmetric)
    }
}

impl From<TrustGraph> for GraphRepr {
    fn from(g: TrustGraph) -> Self {
        GraphRepr {
            n: g.n,
            symmetric: g.symmetric,
            groups: g.groups,
            arcs: g.arcs,
        }
    }
}

impl TrustGraph {
    /// Builds the adjacency views. Endpoints must be `< n` and `groups` must
    /// have length `n`; trust ranges, self-arcs, duplicates and the symmetry
    /// flag are not checked here (see [`crate::validate_instance`]).
    pub fn new(n: usize, arcs: Vec<TrustArc>, groups: Vec<u32>, symmetric: bool) -> Result<Self> {
        if groups.len() != n {
            return Err(Error::param(format!(
                "group labels: expected {n}, got {}",
                groups.len()
            )));
        }
        for a in &arcs {
            for end in [a.src, a.dst] {
                if end.index() >= n {
                    return Err(Error::NodeOutOfRange { node: end.index(), n });
                }
            }
        }

        let mut out_offsets = vec![0usize; n + 1];
        let mut in_offsets = vec![0usize; n + 1];
        for a in &arcs {
            out_offsets[a.src.index() + 1] += 1;
            in_offsets[a.dst.index() + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
            in_offsets[i + 1] += in_offsets[i];
        }

        let m = arcs.len();
        let mut out_targets = vec![0u32; m];
        let mut out_trust = vec![0f64; m];
        let mut out_slot = vec![0usize; m];
        let mut in_sources = vec![0u32; m];
        let mut in_trust = vec![0f64; m];
        let mut out_fill = out_offsets.clone();
        let mut in_fill = in_offsets.clone();
        for a in &arcs {
            let o = out_fill[a.src.index()];
            out_fill[a.src.index()] += 1;
            let i = in_fill[a.dst.index()];
            in_fill[a.dst.index()] += 1;
            out_targets[o] = a.dst.0;
            out_trust[o] = a.trust;
            out_slot[o] = i;
            in_sources[i] = a.src.0;
            in_trust[i] = a.trust;
        }

        Ok(TrustGraph {
            n,
            symmetric,
            groups,
            arcs,
            out_offsets,
            out_targets,
            out_trust,
            out_slot,
            in_offsets,
            in_sources,
            in_trust,
        })
    }

    /// Undirected graph: every edge becomes two arcs with the same trust.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
        groups: Vec<u32>,
    ) -> Result<Self> {
        let mut arcs = Vec::new();
        for (u, w, t) in edges {
            arcs.push(TrustArc {
                src: u.into(),
                dst: w.into(),
                trust: t,
            });
            arcs.push(TrustArc {
                src: w.into(),
                dst: u.into(),
                trust: t,
            });
        }
        TrustGraph::new(n, arcs, groups, true)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn arcs(&self) -> &[TrustArc] {
        &self.arcs
    }

    pub fn groups(&self) -> &[u32] {
        &self.groups
    }

    pub fn group(&self, u: usize) -> u32 {
        self.groups[u]
    }

    /// Out-neighbors of `u` with their trust.
    pub fn out_arcs(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.out_offsets[u]..self.out_offsets[u + 1];
        self.out_targets[r.clone()]
            .iter()
            .zip(&self.out_trust[r])
            .map(|(&w, &t)| (w as usize, t))
    }

    /// In-neighbors of `u` with their trust, in in-slot order.
    pub fn in_arcs(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.in_offsets[u]..self.in_offsets[u + 1];
        self.in_sources[r.clone()]
            .iter()
            .zip(&self.in_trust[r])
            .map(|(&w, &t)| (w as usize, t))
    }

    pub fn out_degree(&self, u: usize) -> usize {
        self.out_offsets[u + 1] - self.out_offsets[u]
    }

    pub fn in_degree(&self, u: usize) -> usize {
        self.in_offsets[u + 1] - self.in_offsets[u]
    }

    pub(crate) fn out_range(&self, u: usize) -> std::ops::Range<usize> {
        self.out_offsets[u]..self.out_offsets[u + 1]
    }

    pub(crate) fn in_range(&self, u: usize) -> std::ops::Range<usize> {
        self.in_offsets[u]..self.in_offsets[u + 1]
    }

    pub(crate) fn out_target(&self, arc: usize) -> usize {
        self.out_targets[arc] as usize
    }

    pub(crate) fn out_trust_at(&self, arc: usize) -> f64 {
        self.out_trust[arc]
    }

    pub(crate) fn out_slot(&self, arc: usize) -> usize {
        self.out_slot[arc]
    }

    pub(crate) fn in_source(&self, slot: usize) -> usize {
        self.in_sources[slot] as usize
    }

    pub(crate) fn in_trust_at(&self, slot: usize) -> f64 {
        self.in_trust[slot]
    }

    /// Sum of outgoing trust.
    pub fn weighted_out_degree(&self, u: usize) -> f64 {
        self.out_trust[self.out_range(u)].iter().sum()
    }

    /// Unweighted mean over all arcs; 0 for an arcless graph.
    pub fn mean_trust(&self) -> f64 {
        if self.arcs.is_empty() {
            return 0.0;
        }
        self.arcs.iter().map(|a| a.trust).sum::<f64>() / self.arcs.len() as f64
    }

    /// Copy of the graph with each arc's trust replaced by `f(arc)`.
    pub fn map_trust(&self, mut f: impl FnMut(&TrustArc) -> f64) -> TrustGraph {
        let arcs = self.arcs.iter().map(|a| TrustArc { trust: f(a), ..*a }).collect();
        TrustGraph::new(self.n, arcs, self.groups.clone(), self.symmetric).expect("endpoints unchanged")
    }

    pub fn with_groups(&self, groups: Vec<u32>) -> Result<TrustGraph> {
        TrustGraph::new(self.n, self.arcs.clone(), groups, self.symmetric)
    }
}
