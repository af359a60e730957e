//! Baseline seeders: uniform random nodes and highest weighted out-degree.

use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::graph::{NodeId, TrustGraph};
use crate::instance::Seeding;
use crate::rng::RngHandle;

/// Gives the first `B_0` nodes to source 0, the next `B_1` to source 1, ...
/// Stops early if `nodes` runs out.
pub fn split_in_order(nodes: impl IntoIterator<Item = NodeId>, budgets: &[usize]) -> Seeding {
    let mut s = Seeding::empty(budgets.len());
    let mut it = nodes.into_iter();
    for (k, &b) in budgets.iter().enumerate() {
        for u in it.by_ref().take(b) {
            s.insert(k, u);
        }
    }
    s
}

/// `ΣB_k` distinct nodes drawn uniformly without replacement.
pub fn random_seeding(n: usize, budgets: &[usize], rng: &RngHandle) -> Result<Seeding> {
    let total: usize = budgets.iter().sum();
    if total > n {
        return Err(Error::param(format!("total budget {total} exceeds node count {n}")));
    }
    let picked = sample(&mut rng.rng(), n, total);
    Ok(split_in_order(picked.into_iter().map(NodeId::from), budgets))
}

/// The `ΣB_k` nodes with the largest total outgoing trust, ties to the
/// lower id.
pub fn high_degree_seeding(graph: &TrustGraph, budgets: &[usize]) -> Seeding {
    let n = graph.node_count();
    let degree: Vec<f64> = (0..n).map(|u| graph.weighted_out_degree(u)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| degree[b].total_cmp(&degree[a]).then(a.cmp(&b)));
    split_in_order(order.into_iter().map(NodeId::from), budgets)
}
