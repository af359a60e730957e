//! Projected Greedy: solve max-max projections of a general instance over a
//! set of uniform thresholds and keep the seeding that does best in the
//! general model.

use std::io::Write;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion::{estimate_coverage, Estimate};
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::instance::{GeneralInstance, NodeTrust, Seeding, SourceSpec};
use crate::io::fmt_float;
use crate::maxmax::{SimplifiedInstance, Thresholds};
use crate::rng::RngHandle;
use crate::seeders::{greedy_lazy_hybrid, Budget, HybridOptions};

const DEDUP_EPS: f64 = 1e-12;
/// Products below this are never generated, even when `t_min` is 0.
const CLOSURE_FLOOR: f64 = 1e-6;

/// Projects `inst` to a max-max instance with uniform threshold `t` and a
/// single source of budget `ΣB_k`, budget-weighted value and mean trust.
pub fn build_simplified(inst: &GeneralInstance, t: f64) -> Result<SimplifiedInstance> {
    if !(t > 0.0) {
        return Err(Error::param(format!("projection threshold must be positive, got {t}")));
    }
    let total = inst.total_budget();
    if total == 0 {
        return Err(Error::param("total budget is zero"));
    }
    let k = inst.source_count();
    let info = inst.sources.iter().map(|s| s.info_value * s.budget as f64).sum::<f64>() / total as f64;
    let node_trust = if k == 1 {
        inst.sources[0].node_trust.clone()
    } else if inst
        .sources
        .iter()
        .all(|s| matches!(s.node_trust, NodeTrust::Uniform(_)))
    {
        NodeTrust::Uniform(inst.sources.iter().map(|s| s.node_trust.get(0)).sum::<f64>() / k as f64)
    } else {
        NodeTrust::PerNode(
            (0..inst.node_count())
                .map(|u| inst.sources.iter().map(|s| s.node_trust.get(u)).sum::<f64>() / k as f64)
                .collect(),
        )
    };
    Ok(SimplifiedInstance {
        graph: Arc::clone(&inst.graph),
        thresholds: Thresholds::Uniform(t),
        sources: vec![SourceSpec {
            info_value: info,
            budget: total,
            node_trust,
        }],
    })
}

/// How a threshold set was derived.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OmegaSource {
    Homogeneous { a_avg: f64, info: f64 },
    TwoLevel { a_high: f64, a_low: f64, info: f64 },
    Grid { step: f64 },
    Explicit,
}

/// Sorted, deduplicated candidate thresholds inside `[t_min, t_max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub thresholds: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub derived_from: OmegaSource,
}

impl ThresholdSet {
    fn build(mut values: Vec<f64>, t_min: f64, t_max: f64, derived_from: OmegaSource) -> Self {
        values.retain(|&t| t >= t_min && t <= t_max);
        values.push(t_min);
        values.push(t_max);
        values.sort_by(f64::total_cmp);
        values.dedup_by(|a, b| (*a - *b).abs() <= DEDUP_EPS);
        ThresholdSet {
            thresholds: values,
            t_min,
            t_max,
            derived_from,
        }
    }

    /// `{t_i}` given directly, clipped to `[t_min, t_max]` plus the endpoints.
    pub fn explicit(values: Vec<f64>, t_min: f64, t_max: f64) -> Self {
        Self::build(values, t_min, t_max, OmegaSource::Explicit)
    }

    /// `lo, lo + step, ...` up to `hi` inclusive.
    pub fn grid(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(lo <= hi) {
            return Err(Error::param(format!("bad threshold grid {lo}..{hi} step {step}")));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize;
        let values = (0..=count).map(|i| lo + i as f64 * step).collect();
        Ok(Self::build(values, lo, hi, OmegaSource::Grid { step }))
    }

    /// `c = |Ω|`.
    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }
}

/// `{a^i·I : i ≥ 0} ∩ [t_min, t_max]` plus the endpoints.
pub fn homogeneous_from(a_avg: f64, info: f64, t_min: f64, t_max: f64) -> ThresholdSet {
    let source = OmegaSource::Homogeneous { a_avg, info };
    if !(a_avg > 0.0 && a_avg < 1.0) {
        log::warn!("mean trust {a_avg} is degenerate; threshold set reduced to its endpoints");
        return ThresholdSet::build(Vec::new(), t_min, t_max, source);
    }
    let floor = t_min.max(CLOSURE_FLOOR);
    let mut values = Vec::new();
    let mut t = info;
    while t >= floor {
        values.push(t);
        t *= a_avg;
    }
    ThresholdSet::build(values, t_min, t_max, source)
}

/// Budget-weighted information value of all sources.
fn weighted_info(inst: &GeneralInstance) -> f64 {
    let total = inst.total_budget();
    if total == 0 {
        return inst.sources.iter().map(|s| s.info_value).sum::<f64>() / inst.source_count().max(1) as f64;
    }
    inst.sources.iter().map(|s| s.info_value * s.budget as f64).sum::<f64>() / total as f64
}

/// Homogeneous threshold set from the mean arc trust of `inst`.
pub fn thresholds_homogeneous(inst: &GeneralInstance) -> ThresholdSet {
    homogeneous_from(
        inst.graph.mean_trust(),
        weighted_info(inst),
        inst.min_t_low(),
        inst.max_t_high(),
    )
}

/// Closure of `{I}` under multiplication by `a_high` and `a_low`, keeping
/// values `≥ t_min`, clipped to `[t_min, t_max]`, plus the endpoints.
pub fn two_level_from(a_high: f64, a_low: f64, info: f64, t_min: f64, t_max: f64) -> ThresholdSet {
    let floor = t_min.max(CLOSURE_FLOOR);
    let mut values: Vec<f64> = Vec::new();
    let mut frontier = vec![info];
    let known = |values: &[f64], x: f64| values.iter().any(|&v| (v - x).abs() <= DEDUP_EPS);
    while let Some(t) = frontier.pop() {
        if t < floor || known(&values, t) {
            continue;
        }
        values.push(t);
        for a in [a_high, a_low] {
            let next = t * a;
            if next < t {
                frontier.push(next);
            }
        }
    }
    ThresholdSet::build(values, t_min, t_max, OmegaSource::TwoLevel { a_high, a_low, info })
}

/// One-dimensional 2-means, initialized at the 25th and 75th percentiles.
/// Returns `(high mean, low mean)`, or `None` when the clusters coincide.
pub fn two_means(values: &[f64]) -> Option<(f64, f64)> {
    if values.len() < 2 {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pct = |q: f64| sorted[((sorted.len() - 1) as f64 * q).round() as usize];
    let (mut lo, mut hi) = (pct(0.25), pct(0.75));
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let split = sorted.partition_point(|&x| x <= mid);
        if split == 0 || split == sorted.len() {
            break;
        }
        let nlo = sorted[..split].iter().sum::<f64>() / split as f64;
        let nhi = sorted[split..].iter().sum::<f64>() / (sorted.len() - split) as f64;
        if nlo == lo && nhi == hi {
            break;
        }
        lo = nlo;
        hi = nhi;
    }
    if (hi - lo).abs() <= DEDUP_EPS {
        None
    } else {
        Some((hi, lo))
    }
}

/// Two-level threshold set from 2-means over the arc trusts of `inst`.
/// Falls back to [`thresholds_homogeneous`] when the clusters coincide.
pub fn thresholds_two_level(inst: &GeneralInstance) -> ThresholdSet {
    let trusts: Vec<f64> = inst.graph.arcs().iter().map(|a| a.trust).collect();
    match two_means(&trusts) {
        Some((a_high, a_low)) => {
            two_level_from(a_high, a_low, weighted_info(inst), inst.min_t_low(), inst.max_t_high())
        }
        None => thresholds_homogeneous(inst),
    }
}

/// Assigns `merged` to sources uniformly at random within the budgets.
pub fn partition_seeds(merged: &[NodeId], budgets: &[usize], rng: &RngHandle) -> Result<Seeding> {
    let capacity: usize = budgets.iter().sum();
    if merged.len() > capacity {
        return Err(Error::InfeasiblePartition {
            nodes: merged.len(),
            capacity,
        });
    }
    let mut slots: Vec<usize> = budgets
        .iter()
        .enumerate()
        .flat_map(|(k, &b)| std::iter::repeat_n(k, b))
        .collect();
    slots.shuffle(&mut rng.rng());
    let mut s = Seeding::empty(budgets.len());
    for (&u, &k) in merged.iter().zip(&slots) {
        s.insert(k, u);
    }
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionOptions {
    /// Replications per candidate evaluation in the general model.
    pub replications: usize,
    pub hybrid: HybridOptions,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions {
            replications: 20,
            hybrid: HybridOptions::default(),
        }
    }
}

/// Seed set greedy found for one projected threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub threshold: f64,
    /// Seeds in the single-source projection, before partitioning.
    pub merged: Vec<NodeId>,
    /// Coverage of `merged` in the projection.
    pub simplified_coverage: usize,
    pub seeding: Seeding,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdResult {
    pub candidate: Candidate,
    pub estimate: Estimate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionReport {
    /// One row per threshold, ascending.
    pub rows: Vec<ThresholdResult>,
    pub best: usize,
}

impl ProjectionReport {
    pub fn best_threshold(&self) -> f64 {
        self.rows[self.best].candidate.threshold
    }

    pub fn best_seeding(&self) -> &Seeding {
        &self.rows[self.best].candidate.seeding
    }

    pub fn best_estimate(&self) -> Estimate {
        self.rows[self.best].estimate
    }

    /// `threshold,coverage_mean,coverage_stderr,seeds_file`, one row per threshold.
    pub fn write_csv<W: Write>(&self, w: W, seeds_file: impl Fn(usize) -> String) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["threshold", "coverage_mean", "coverage_stderr", "seeds_file"])
            .map_err(csv_err)?;
        for (i, r) in self.rows.iter().enumerate() {
            out.write_record([
                fmt_float(r.candidate.threshold),
                fmt_float(r.estimate.mean),
                fmt_float(r.estimate.stderr),
                seeds_file(i),
            ])
            .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Greedy seedings for every threshold in `omega`. Thresholds are solved in
/// parallel; every one partitions its seeds on the same stream.
pub fn projected_candidates(
    inst: &GeneralInstance,
    omega: &ThresholdSet,
    opts: &ProjectionOptions,
    rng: &RngHandle,
) -> Result<Vec<Candidate>> {
    let budgets = inst.budgets();
    let partition_rng = rng.derive("partition");
    omega
        .thresholds
        .par_iter()
        .map(|&t| {
            let sinst = build_simplified(inst, t)?;
            let res = greedy_lazy_hybrid(&sinst, &Budget::PerSource(sinst.budgets()), &opts.hybrid);
            let merged = res.seeding.set(0).to_vec();
            let seeding = partition_seeds(&merged, &budgets, &partition_rng)?;
            Ok(Candidate {
                threshold: t,
                merged,
                simplified_coverage: res.covered,
                seeding,
            })
        })
        .collect()
}

/// Evaluates candidates in the general model on shared replication streams
/// and picks the best (ties to the smaller threshold).
pub fn evaluate_candidates(
    inst: &GeneralInstance,
    candidates: Vec<Candidate>,
    replications: usize,
    rng: &RngHandle,
) -> Result<ProjectionReport> {
    if candidates.is_empty() {
        return Err(Error::param("threshold set is empty"));
    }
    let eval_rng = rng.derive("eval");
    let estimates: Vec<Estimate> = candidates
        .par_iter()
        .map(|c| estimate_coverage(inst, &c.seeding, replications, &eval_rng))
        .collect::<Result<_>>()?;
    let mut rows: Vec<ThresholdResult> = candidates
        .into_iter()
        .zip(estimates)
        .map(|(candidate, estimate)| ThresholdResult { candidate, estimate })
        .collect();
    rows.sort_by(|a, b| a.candidate.threshold.total_cmp(&b.candidate.threshold));
    let mut best = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.estimate.mean > rows[best].estimate.mean {
            best = i;
        }
    }
    Ok(ProjectionReport { rows, best })
}

/// Full pipeline: project, greedy, partition, evaluate, pick the best.
pub fn projected_greedy(
    inst: &GeneralInstance,
    omega: &ThresholdSet,
    opts: &ProjectionOptions,
    rng: &RngHandle,
) -> Result<ProjectionReport> {
    let candidates = projected_candidates(inst, omega, opts, rng)?;
    evaluate_candidates(inst, candidates, opts.replications, rng)
}
