//! Simulation of the four-state trust-weighted diffusion.
//!
//! Each node keeps, per source, the value it got directly from seeding and
//! one slot per in-neighbor holding the best value that neighbor has passed
//! on. Rounds are synchronous: pushes (believers) and pulls (undecided nodes)
//! read the fused values from the start of the round, then every touched node
//! re-fuses and is reclassified.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::NodeId;
use crate::instance::{EvacuationDelay, GeneralInstance, Seeding};
use crate::rng::RngHandle;

pub const DEFAULT_MAX_STEPS: usize = 50;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeState {
    Disbelieved,
    Undecided,
    Believed,
    Evacuated,
}

/// `λ_d·Σ v_k + (1−λ_d)·max v_k`, 0 for empty or all-zero input.
pub fn info_value(values: &[f64], lambda_d: f64) -> f64 {
    combine(values.iter().copied(), lambda_d)
}

/// Fuses the direct value and the per-neighbor values of one source:
/// `λ_s·Σ v^j + (1−λ_s)·max v^j` over `j = 0..δ`.
pub fn fuse_source(direct: f64, neighbors: &[f64], lambda_s: f64) -> f64 {
    combine(std::iter::once(direct).chain(neighbors.iter().copied()), lambda_s)
}

#[inline]
fn combine(values: impl Iterator<Item = f64>, lambda: f64) -> f64 {
    let (sum, max) = values.fold((0.0f64, 0.0f64), |(s, m), v| (s + v, m.max(v)));
    lambda * sum + (1.0 - lambda) * max
}

#[inline]
fn classify(info: f64, t_low: f64, t_high: f64) -> NodeState {
    if info >= t_high {
        NodeState::Believed
    } else if info >= t_low {
        NodeState::Undecided
    } else {
        NodeState::Disbelieved
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepCounts {
    pub believed: usize,
    pub undecided: usize,
    pub evacuated: usize,
}

impl StepCounts {
    /// Nodes that have reached Believed, including those since evacuated.
    pub fn believers(&self) -> usize {
        self.believed + self.evacuated
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct StepReport {
    /// Some stored value increased this round.
    pub changed: bool,
    /// Some attempt (successful or not) would have increased a stored value.
    pub potential: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub believers: usize,
    pub evacuated: usize,
    pub steps_executed: usize,
    pub converged: bool,
    /// Counts after seeding (index 0) and after each executed step.
    pub trace: Vec<StepCounts>,
}

impl RunOutcome {
    pub fn believer_trace(&self) -> Vec<usize> {
        self.trace.iter().map(StepCounts::believers).collect()
    }

    /// One `step=<i> believed=<int> undecided=<int> evacuated=<int>` line per entry.
    pub fn trace_lines(&self) -> String {
        let mut s = String::new();
        for (i, c) in self.trace.iter().enumerate() {
            s.push_str(&format!(
                "step={i} believed={} undecided={} evacuated={}\n",
                c.believed, c.undecided, c.evacuated
            ));
        }
        s
    }
}

/// Mutable diffusion state over one instance.
#[derive(Clone, Debug)]
pub struct Simulation<'a> {
    inst: &'a GeneralInstance,
    k: usize,
    direct: Vec<f64>,
    slots: Vec<f64>,
    fused: Vec<f64>,
    info: Vec<f64>,
    state: Vec<NodeState>,
    countdown: Vec<u32>,
    counts: StepCounts,
    dirty: Vec<bool>,
    dirty_list: Vec<usize>,
}

impl<'a> Simulation<'a> {
    /// All-zero state, every node classified against I(u) = 0.
    pub fn new(inst: &'a GeneralInstance) -> Self {
        let n = inst.node_count();
        let k = inst.source_count();
        let m = inst.graph.arc_count();
        let mut sim = Simulation {
            inst,
            k,
            direct: vec![0.0; n * k],
            slots: vec![0.0; m * k],
            fused: vec![0.0; n * k],
            info: vec![0.0; n],
            state: vec![NodeState::Disbelieved; n],
            countdown: vec![0; n],
            counts: StepCounts::default(),
            dirty: vec![false; n],
            dirty_list: Vec::new(),
        };
        for u in 0..n {
            sim.set_state(u, sim.classify_node(u));
        }
        sim
    }

    fn tau_steps(&self) -> u32 {
        match self.inst.tau {
            EvacuationDelay::Steps(t) => t,
            EvacuationDelay::Never => u32::MAX,
        }
    }

    fn classify_node(&self, u: usize) -> NodeState {
        let p = &self.inst.profiles[u];
        classify(self.info[u], p.t_low, p.t_high)
    }

    fn set_state(&mut self, u: usize, new: NodeState) {
        let old = self.state[u];
        if old == new {
            return;
        }
        match old {
            NodeState::Believed => self.counts.believed -= 1,
            NodeState::Undecided => self.counts.undecided -= 1,
            NodeState::Evacuated => self.counts.evacuated -= 1,
            NodeState::Disbelieved => {}
        }
        match new {
            NodeState::Believed => {
                self.counts.believed += 1;
                self.countdown[u] = self.tau_steps();
            }
            NodeState::Undecided => self.counts.undecided += 1,
            NodeState::Evacuated => self.counts.evacuated += 1,
            NodeState::Disbelieved => {}
        }
        self.state[u] = new;
    }

    fn mark(&mut self, u: usize) {
        if !self.dirty[u] {
            self.dirty[u] = true;
            self.dirty_list.push(u);
        }
    }

    fn refuse(&mut self, u: usize) {
        let g = &self.inst.graph;
        let k = self.k;
        let lambda_s = self.inst.lambda_s;
        let range = g.in_range(u);
        for src in 0..k {
            let direct = self.direct[u * k + src];
            let slots = &self.slots;
            self.fused[u * k + src] = combine(
                std::iter::once(direct).chain(range.clone().map(|s| slots[s * k + src])),
                lambda_s,
            );
        }
        self.info[u] = info_value(&self.fused[u * k..(u + 1) * k], self.inst.lambda_d);
    }

    /// Re-fuses and reclassifies every node touched since the last flush.
    fn flush(&mut self) {
        let list = std::mem::take(&mut self.dirty_list);
        for &u in &list {
            self.dirty[u] = false;
            self.refuse(u);
            if self.state[u] != NodeState::Evacuated {
                let s = self.classify_node(u);
                // stored values only grow, so a believer never falls back
                if self.state[u] != NodeState::Believed {
                    self.set_state(u, s);
                }
            }
        }
        self.dirty_list = list;
        self.dirty_list.clear();
    }

    /// Injects source values into seed nodes. Seeding always succeeds.
    pub fn apply_seeding(&mut self, seeding: &Seeding) -> Result<()> {
        seeding.check(self.inst.node_count(), &self.inst.budgets())?;
        self.inject(seeding);
        Ok(())
    }

    /// Seeds without checking per-source budgets (node ids must be in range).
    pub(crate) fn inject(&mut self, seeding: &Seeding) {
        let inst = self.inst;
        for (u, src) in seeding.pairs() {
            let u = u.index();
            let v = inst.sources[src].seed_value(u);
            let slot = &mut self.direct[u * self.k + src];
            if v > *slot {
                *slot = v;
                self.mark(u);
            }
        }
        self.flush();
    }

    #[inline]
    fn attempt<R: Rng>(p: f64, rng: &mut R) -> bool {
        if p >= 1.0 {
            true
        } else if p <= 0.0 {
            false
        } else {
            rng.random::<f64>() < p
        }
    }

    /// One synchronous round.
    pub fn step<R: Rng>(&mut self, rng: &mut R) -> StepReport {
        let inst = self.inst;
        let g = &*inst.graph;
        let k = self.k;
        let p = inst.transmit_p;
        let n = g.node_count();
        let can_succeed = p > 0.0;
        let mut changed = false;
        let mut potential = false;

        // believers push
        for u in 0..n {
            if self.state[u] != NodeState::Believed {
                continue;
            }
            for arc in g.out_range(u) {
                let w = g.out_target(arc);
                if self.state[w] == NodeState::Evacuated {
                    continue;
                }
                let ok = Self::attempt(p, rng);
                let trust = g.out_trust_at(arc);
                let slot = g.out_slot(arc);
                for src in 0..k {
                    let v = trust * self.fused[u * k + src];
                    if v > self.slots[slot * k + src] {
                        potential |= can_succeed;
                        if ok {
                            self.slots[slot * k + src] = v;
                            changed = true;
                            self.mark(w);
                        }
                    }
                }
            }
        }

        // undecided nodes query every reachable in-neighbor
        for u in 0..n {
            if self.state[u] != NodeState::Undecided {
                continue;
            }
            for slot in g.in_range(u) {
                let w = g.in_source(slot);
                if self.state[w] == NodeState::Evacuated {
                    continue;
                }
                let ok = Self::attempt(p, rng);
                let trust = g.in_trust_at(slot);
                for src in 0..k {
                    let v = trust * self.fused[w * k + src];
                    if v > self.slots[slot * k + src] {
                        potential |= can_succeed;
                        if ok {
                            self.slots[slot * k + src] = v;
                            changed = true;
                            self.mark(u);
                        }
                    }
                }
            }
        }

        // believers that broadcast this round count down; new believers start next round
        if self.tau_steps() != u32::MAX {
            for u in 0..n {
                if self.state[u] == NodeState::Believed {
                    self.countdown[u] -= 1;
                    if self.countdown[u] == 0 {
                        self.set_state(u, NodeState::Evacuated);
                    }
                }
            }
        }

        self.flush();
        StepReport { changed, potential }
    }

    /// Believers still waiting to evacuate (always 0 when τ = ∞).
    pub fn pending_countdowns(&self) -> usize {
        if self.tau_steps() == u32::MAX {
            0
        } else {
            self.counts.believed
        }
    }

    /// Steps until all nodes evacuated, quiescence, or `max_steps`.
    pub fn run_to_end<R: Rng>(&mut self, rng: &mut R, max_steps: usize) -> RunOutcome {
        let n = self.inst.node_count();
        let mut trace = vec![self.counts];
        let mut converged = false;
        let mut steps = 0;
        while steps < max_steps {
            let report = self.step(rng);
            steps += 1;
            trace.push(self.counts);
            if self.counts.evacuated == n || (!report.potential && self.pending_countdowns() == 0) {
                converged = true;
                break;
            }
        }
        RunOutcome {
            believers: self.counts.believers(),
            evacuated: self.counts.evacuated,
            steps_executed: steps,
            converged,
            trace,
        }
    }

    pub fn counts(&self) -> StepCounts {
        self.counts
    }

    pub fn state(&self, u: usize) -> NodeState {
        self.state[u]
    }

    pub fn info(&self, u: usize) -> f64 {
        self.info[u]
    }

    pub fn fused(&self, u: usize, src: usize) -> f64 {
        self.fused[u * self.k + src]
    }

    pub fn direct(&self, u: usize, src: usize) -> f64 {
        self.direct[u * self.k + src]
    }

    /// Value in the slot for in-neighbor `from` of `u`, if that arc exists.
    pub fn received(&self, u: usize, from: usize, src: usize) -> Option<f64> {
        let g = &self.inst.graph;
        g.in_range(u)
            .find(|&s| g.in_source(s) == from)
            .map(|s| self.slots[s * self.k + src])
    }

    /// Every stored direct and per-neighbor value, in a fixed order.
    pub fn stored_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.direct.iter().chain(self.slots.iter()).copied()
    }

    /// Nodes that are Believed or Evacuated.
    pub fn believer_set(&self) -> Vec<NodeId> {
        self.state
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, NodeState::Believed | NodeState::Evacuated))
            .map(|(u, _)| NodeId::from(u))
            .collect()
    }
}

/// Seeds, then steps until termination. `max_steps` must be at least 1.
pub fn run(inst: &GeneralInstance, seeding: &Seeding, rng: &RngHandle, max_steps: usize) -> Result<RunOutcome> {
    let mut sim = Simulation::new(inst);
    sim.apply_seeding(seeding)?;
    Ok(sim.run_to_end(&mut rng.rng(), max_steps.max(1)))
}

/// Mean and standard error of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Estimate {
                mean: 0.0,
                stderr: 0.0,
                samples: 0,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Estimate {
            mean,
            stderr,
            samples: n,
        }
    }
}

/// Expected number of believers over `reps` runs on streams `rep/<r>` of `rng`.
pub fn estimate_coverage(inst: &GeneralInstance, seeding: &Seeding, reps: usize, rng: &RngHandle) -> Result<Estimate> {
    estimate_coverage_with(inst, seeding, reps, rng, DEFAULT_MAX_STEPS)
}

pub fn estimate_coverage_with(
    inst: &GeneralInstance,
    seeding: &Seeding,
    reps: usize,
    rng: &RngHandle,
    max_steps: usize,
) -> Result<Estimate> {
    seeding.check(inst.node_count(), &inst.budgets())?;
    Ok(estimate_unchecked(inst, seeding, reps, rng, max_steps))
}

/// Like [`estimate_coverage_with`] but only requires node ids in range;
/// used where the budget is a total rather than per source.
pub(crate) fn estimate_unchecked(
    inst: &GeneralInstance,
    seeding: &Seeding,
    reps: usize,
    rng: &RngHandle,
    max_steps: usize,
) -> Estimate {
    let samples: Vec<f64> = (0..reps.max(1))
        .into_par_iter()
        .map(|r| {
            let mut sim = Simulation::new(inst);
            sim.inject(seeding);
            let rep = rng.derive(format_args!("rep/{r}"));
            sim.run_to_end(&mut rep.rng(), max_steps.max(1)).believers as f64
        })
        .collect();
    Estimate::from_samples(&samples)
}
