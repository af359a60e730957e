//! Seed selection strategies.

mod actual;
mod baseline;
mod brute;
mod greedy;

use serde::{Deserialize, Serialize};

pub use actual::{actual_greedy, ActualGreedyOptions};
pub use baseline::{high_degree_seeding, random_seeding, split_in_order};
pub use brute::{brute_force, seeding_count, GeneralObjective, MaxMaxObjective, Objective, DEFAULT_BRUTE_FORCE_CAP};
pub use greedy::{greedy_lazy_hybrid, greedy_maxmax, GreedyResult, GreedyStats, HybridOptions};

/// Budget constraint over (node, source) pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    /// `|ψ_k| ≤ B_k` for each source (a partition matroid).
    PerSource(Vec<usize>),
    /// `Σ_k |ψ_k| ≤ B`.
    Total(usize),
}

impl Budget {
    pub(crate) fn can_add(&self, k: usize, used: &[usize]) -> bool {
        match self {
            Budget::PerSource(b) => used[k] < b[k],
            Budget::Total(b) => used.iter().sum::<usize>() < *b,
        }
    }

    pub(crate) fn exhausted(&self, used: &[usize]) -> bool {
        match self {
            Budget::PerSource(b) => used.iter().zip(b).all(|(u, b)| u >= b),
            Budget::Total(b) => used.iter().sum::<usize>() >= *b,
        }
    }

    pub fn total(&self) -> usize {
        match self {
            Budget::PerSource(b) => b.iter().sum(),
            Budget::Total(b) => *b,
        }
    }
}
