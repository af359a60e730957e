//! Small hand-built instances showing that the general coverage function is
//! neither monotone nor submodular. Single source, `I = 1`, full source
//! trust, `λ_d = λ_s = 0`, `p = 1`.

use std::sync::Arc;

use crate::graph::TrustGraph;
use crate::instance::{EvacuationDelay, GeneralInstance, NodeProfile, SourceSpec};

/// Node ids of the non-monotonicity gadget. Peripheral nodes follow `b`.
pub mod bridge {
    pub const A: usize = 0;
    pub const X1: usize = 1;
    pub const X2: usize = 2;
    pub const C: usize = 3;
    pub const B: usize = 4;
    pub const FIRST_PERIPHERAL: usize = 5;
}

/// Chain `a — x1 — x2 — c`, `b — c` with trust 0.1, and `k` peripheral
/// nodes hanging off `c`. Thresholds 0.5 except the high-strung `c` at 0.1.
///
/// With `τ = 1`: seeding `{a}` converts `k + 4` nodes; seeding `{a, b}` lets
/// `c` panic on 0.1 and leave before the full value arrives, converting 5.
pub fn non_monotone(k: usize, budget: usize) -> GeneralInstance {
    use bridge::*;
    let n = FIRST_PERIPHERAL + k;
    let mut edges = vec![(A, X1, 1.0), (X1, X2, 1.0), (X2, C, 1.0), (B, C, 0.1)];
    edges.extend((0..k).map(|i| (C, FIRST_PERIPHERAL + i, 1.0)));
    let graph = TrustGraph::from_edges(n, edges, vec![0; n]).expect("valid gadget");
    let mut profiles = vec![NodeProfile::single(0.5); n];
    profiles[C] = NodeProfile::single(0.1);
    GeneralInstance {
        graph: Arc::new(graph),
        profiles,
        sources: vec![SourceSpec::uniform(1.0, budget, 1.0)],
        lambda_d: 0.0,
        lambda_s: 0.0,
        tau: EvacuationDelay::Steps(1),
        transmit_p: 1.0,
    }
}

/// Node ids of the non-submodularity gadget. Peripheral nodes follow `e`.
pub mod query {
    pub const A: usize = 0;
    pub const B: usize = 1;
    pub const C: usize = 2;
    pub const D: usize = 3;
    pub const E: usize = 4;
    pub const FIRST_PERIPHERAL: usize = 5;
}

/// `a — d` (0.9), `d — c` (1.0), `b — c` (0.1), `c — e` (1.0), and `k`
/// peripheral nodes on `e`. Thresholds 0.5 except `d` at (0.91, 0.91) and
/// `c` at (0.1, 0.9).
///
/// `{a}` and `{b}` each convert only themselves; together `c` becomes
/// undecided on `b`'s 0.1, queries `d` for 0.9, believes, and converts `e`
/// and everything beyond it: `k + 4` nodes.
pub fn non_submodular(k: usize, budget: usize) -> GeneralInstance {
    use query::*;
    let n = FIRST_PERIPHERAL + k;
    let mut edges = vec![(A, D, 0.9), (D, C, 1.0), (B, C, 0.1), (C, E, 1.0)];
    edges.extend((0..k).map(|i| (E, FIRST_PERIPHERAL + i, 1.0)));
    let graph = TrustGraph::from_edges(n, edges, vec![0; n]).expect("valid gadget");
    let mut profiles = vec![NodeProfile::single(0.5); n];
    profiles[D] = NodeProfile::single(0.91);
    profiles[C] = NodeProfile::new(0.1, 0.9);
    GeneralInstance {
        graph: Arc::new(graph),
        profiles,
        sources: vec![SourceSpec::uniform(1.0, budget, 1.0)],
        lambda_d: 0.0,
        lambda_s: 0.0,
        tau: EvacuationDelay::Steps(10),
        transmit_p: 1.0,
    }
}
