//! Greedy directly on the general model, with Monte Carlo gain estimates.

use rayon::prelude::*;

use super::Budget;
use crate::diffusion::{estimate_unchecked, DEFAULT_MAX_STEPS};
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::instance::{GeneralInstance, Seeding};
use crate::rng::RngHandle;

#[derive(Clone, Debug, PartialEq)]
pub struct ActualGreedyOptions {
    pub replications: usize,
    pub max_steps: usize,
    /// Largest node count accepted without `force`.
    pub size_guard: usize,
    pub force: bool,
}

impl Default for ActualGreedyOptions {
    fn default() -> Self {
        ActualGreedyOptions {
            replications: 100,
            max_steps: DEFAULT_MAX_STEPS,
            size_guard: 500,
            force: false,
        }
    }
}

/// Adds, one at a time, the pair with the largest estimated coverage.
///
/// All candidates in one step are evaluated on the same replication streams
/// (`step/<s>/rep/<r>`), so their comparison is not drowned in coin-flip
/// noise. Ties go to the lower node id, then the lower source id.
pub fn actual_greedy(
    inst: &GeneralInstance,
    budget: &Budget,
    opts: &ActualGreedyOptions,
    rng: &RngHandle,
) -> Result<Seeding> {
    let n = inst.node_count();
    let k = inst.source_count();
    if n > opts.size_guard && !opts.force {
        return Err(Error::SizeGuard {
            n,
            limit: opts.size_guard,
        });
    }
    if let Budget::PerSource(b) = budget {
        if b.len() != k {
            return Err(Error::SourceCountMismatch {
                expected: k,
                got: b.len(),
            });
        }
    }
    let mut seeding = Seeding::empty(k);
    let mut used = vec![0usize; k];
    let mut current = 0.0;
    let mut step = 0;
    while !budget.exhausted(&used) && current < n as f64 {
        let step_rng = rng.derive(format_args!("step/{step}"));
        let candidates: Vec<usize> = (0..n * k)
            .filter(|&p| budget.can_add(p % k, &used) && !seeding.contains(p % k, NodeId::from(p / k)))
            .collect();
        if candidates.is_empty() {
            break;
        }
        let values: Vec<f64> = candidates
            .par_iter()
            .map(|&p| {
                let mut trial = seeding.clone();
                trial.insert(p % k, NodeId::from(p / k));
                estimate_unchecked(inst, &trial, opts.replications, &step_rng, opts.max_steps).mean
            })
            .collect();
        let mut best = 0;
        for i in 1..values.len() {
            if values[i] > values[best] {
                best = i;
            }
        }
        let p = candidates[best];
        seeding.insert(p % k, NodeId::from(p / k));
        used[p % k] += 1;
        current = values[best];
        step += 1;
    }
    Ok(seeding)
}
