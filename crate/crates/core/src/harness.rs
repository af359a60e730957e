//! Scenario-driven experiments: build networks, run seeders, evaluate them
//! in the general model and tabulate evacuated fractions and regret.

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion::{Estimate, Simulation, DEFAULT_MAX_STEPS};
use crate::error::{Error, Result};
use crate::graph::{NodeId, TrustGraph};
use crate::graphgen::{
    assign_thresholds, assign_trust, gen_geometric_group, gen_random_group, gen_scale_free, GeometricParams,
    ThresholdSpec, TrustScenario,
};
use crate::instance::{EvacuationDelay, GeneralInstance, NodeProfile, SourceSpec};
use crate::io::fmt_float;
use crate::projection::{
    partition_seeds, projected_candidates, projected_greedy, thresholds_homogeneous, thresholds_two_level, Candidate,
    ProjectionOptions, ThresholdSet,
};
use crate::rng::RngHandle;
use crate::seeders::{high_degree_seeding, random_seeding};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NetworkKind {
    ScaleFree {
        #[serde(default = "default_m")]
        m: usize,
    },
    RandomGroup {
        #[serde(default = "default_degree")]
        avg_degree: f64,
        #[serde(default = "default_ratio")]
        ratio: f64,
    },
    Geometric(#[serde(default)] GeometricParams),
}

fn default_m() -> usize {
    2
}

fn default_degree() -> f64 {
    4.0
}

fn default_ratio() -> f64 {
    2.0
}

impl NetworkKind {
    pub fn short_name(&self) -> &'static str {
        match self {
            NetworkKind::ScaleFree { .. } => "SF",
            NetworkKind::RandomGroup { .. } => "RG",
            NetworkKind::Geometric(_) => "GEO",
        }
    }

    pub fn generate(&self, n: usize, rng: &RngHandle) -> Result<TrustGraph> {
        match self {
            NetworkKind::ScaleFree { m } => gen_scale_free(n, *m, rng),
            NetworkKind::RandomGroup { avg_degree, ratio } => gen_random_group(n, *avg_degree, *ratio, rng),
            NetworkKind::Geometric(p) => gen_geometric_group(n, p, rng),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeederKind {
    #[serde(rename = "R", alias = "random")]
    Random,
    #[serde(rename = "HD", alias = "high_degree")]
    HighDegree,
    #[serde(rename = "PG", alias = "projected_greedy")]
    ProjectedGreedy,
}

impl SeederKind {
    pub fn short_name(self) -> &'static str {
        match self {
            SeederKind::Random => "R",
            SeederKind::HighDegree => "HD",
            SeederKind::ProjectedGreedy => "PG",
        }
    }
}

/// Threshold set used by Projected Greedy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OmegaSpec {
    Homogeneous,
    TwoLevel,
    Grid { lo: f64, hi: f64, step: f64 },
    Explicit { values: Vec<f64> },
}

impl OmegaSpec {
    pub fn build(&self, inst: &GeneralInstance) -> Result<ThresholdSet> {
        match self {
            OmegaSpec::Homogeneous => Ok(thresholds_homogeneous(inst)),
            OmegaSpec::TwoLevel => Ok(thresholds_two_level(inst)),
            OmegaSpec::Grid { lo, hi, step } => ThresholdSet::grid(*lo, *hi, *step),
            OmegaSpec::Explicit { values } => {
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if values.is_empty() {
                    return Err(Error::param("explicit threshold list is empty"));
                }
                Ok(ThresholdSet::explicit(values.clone(), lo, hi))
            }
        }
    }
}

/// One experiment setting. Every field has a desk-scale default, so config
/// files only list what they change.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    pub id: String,
    pub network: NetworkKind,
    pub nodes: usize,
    pub trust: TrustScenario,
    pub thresholds: ThresholdSpec,
    pub lambda_d: f64,
    pub lambda_s: f64,
    pub tau: EvacuationDelay,
    pub transmit_p: f64,
    pub sources: usize,
    pub info_value: f64,
    pub source_trust: f64,
    pub budget_frac: f64,
    pub seeders: Vec<SeederKind>,
    /// Evaluation runs per graph instance.
    pub replications: usize,
    /// Independent graph instances.
    pub graphs: usize,
    pub max_steps: usize,
    pub omega: OmegaSpec,
    /// Runs per threshold when Projected Greedy scores its candidates.
    pub pg_replications: usize,
    /// When set, the scenario expands to one per listed value.
    pub budget_fracs: Option<Vec<f64>>,
    pub lambda_ds: Option<Vec<f64>>,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            id: "scenario".into(),
            network: NetworkKind::RandomGroup {
                avg_degree: 4.0,
                ratio: 2.0,
            },
            nodes: 10_000,
            trust: TrustScenario::GroupVariable { a: 0.7, epsilon: 0.05 },
            thresholds: ThresholdSpec::Pair {
                t_low: 0.15,
                t_high: 0.55,
            },
            lambda_d: 0.0,
            lambda_s: 0.0,
            tau: EvacuationDelay::Steps(5),
            transmit_p: 0.75,
            sources: 5,
            info_value: 0.95,
            source_trust: 0.9,
            budget_frac: 0.05,
            seeders: vec![SeederKind::Random, SeederKind::HighDegree, SeederKind::ProjectedGreedy],
            replications: 10,
            graphs: 3,
            max_steps: DEFAULT_MAX_STEPS,
            omega: OmegaSpec::Homogeneous,
            pg_replications: 10,
            budget_fracs: None,
            lambda_ds: None,
        }
    }
}

impl Scenario {
    /// Full-size settings: 100,000 nodes, 100 runs over 10 graphs.
    pub fn paper_scale(mut self) -> Self {
        self.nodes = 100_000;
        self.replications = 100;
        self.graphs = 10;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fracs = self.budget_fracs.clone().unwrap_or_else(|| vec![self.budget_frac]);
        if let Some(f) = fracs.iter().find(|&&f| !(f > 0.0 && f <= 1.0)) {
            return Err(Error::param(format!("budget fraction {f} outside (0, 1]")));
        }
        if self.replications == 0 || self.graphs == 0 || self.pg_replications == 0 {
            return Err(Error::param("replications and graph count must be at least 1"));
        }
        if self.sources == 0 {
            return Err(Error::param("at least one source is required"));
        }
        if self.seeders.is_empty() {
            return Err(Error::param("seeder list is empty"));
        }
        Ok(())
    }

    /// Scenarios for every listed budget fraction and `λ_d`, budget outermost.
    pub fn expand(&self) -> Vec<Scenario> {
        let fracs = self.budget_fracs.clone().unwrap_or_else(|| vec![self.budget_frac]);
        let lds = self.lambda_ds.clone().unwrap_or_else(|| vec![self.lambda_d]);
        let mut out = Vec::new();
        for &b in &fracs {
            for &l in &lds {
                let mut s = self.clone();
                s.budget_frac = b;
                s.lambda_d = l;
                s.budget_fracs = None;
                s.lambda_ds = None;
                if self.budget_fracs.is_some() || self.lambda_ds.is_some() {
                    s.id = format!("{}/b{}/ld{}", self.id, b, l);
                }
                out.push(s);
            }
        }
        out
    }

    /// `round(budget_frac·n)` seeds split as evenly as possible, the
    /// remainder going to the lower-numbered sources.
    pub fn budgets(&self) -> Vec<usize> {
        let total = (self.budget_frac * self.nodes as f64).round() as usize;
        let k = self.sources;
        (0..k).map(|i| total / k + usize::from(i < total % k)).collect()
    }

    pub fn instance(&self, graph: Arc<TrustGraph>, profiles: Vec<NodeProfile>) -> GeneralInstance {
        let budgets = self.budgets();
        GeneralInstance {
            graph,
            profiles,
            sources: budgets
                .into_iter()
                .map(|b| SourceSpec::uniform(self.info_value, b, self.source_trust))
                .collect(),
            lambda_d: self.lambda_d,
            lambda_s: self.lambda_s,
            tau: self.tau,
            transmit_p: self.transmit_p,
        }
    }

    /// Graph `g` with trusts and thresholds assigned. Depends only on the
    /// network settings and `rng`, so expanded scenarios share graphs.
    pub fn build_network(&self, g: usize, rng: &RngHandle) -> Result<(Arc<TrustGraph>, Vec<NodeProfile>)> {
        let base = rng.derive(format_args!("graph/{g}"));
        let raw = self.network.generate(self.nodes, &base.derive("structure"))?;
        let graph = assign_trust(&raw, &self.trust, &base.derive("trust"))?;
        let profiles = assign_thresholds(self.nodes, &self.thresholds, &base.derive("thresholds"))?;
        Ok((Arc::new(graph), profiles))
    }
}

/// One line of the results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario_id: String,
    pub network: String,
    pub trust_scenario: String,
    pub tl: f64,
    pub th: f64,
    pub lambda_d: f64,
    pub budget_frac: f64,
    pub seeder: String,
    pub evac_frac_mean: f64,
    pub evac_frac_stderr: f64,
    pub regret_pct: f64,
    pub wallclock_s: Option<f64>,
}

pub const RESULT_COLUMNS: [&str; 12] = [
    "scenario_id",
    "network",
    "trust_scenario",
    "tl",
    "th",
    "lambda_d",
    "budget_frac",
    "seeder",
    "evac_frac_mean",
    "evac_frac_stderr",
    "regret_pct",
    "wallclock_s",
];

/// `(best − x) / best · 100`, or 0 when `best` is 0.
pub fn regret_pct(best: f64, x: f64) -> f64 {
    if best > 0.0 {
        (best - x) / best * 100.0
    } else {
        0.0
    }
}

/// Fills `regret_pct` against the best mean among `rows`.
pub fn apply_regret(rows: &mut [ResultRow]) {
    let best = rows.iter().map(|r| r.evac_frac_mean).fold(f64::NEG_INFINITY, f64::max);
    for r in rows {
        r.regret_pct = if r.evac_frac_mean == best {
            0.0
        } else {
            regret_pct(best, r.evac_frac_mean)
        };
    }
}

pub fn write_results_csv<W: Write>(w: W, rows: &[ResultRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RESULT_COLUMNS).map_err(crate::projection::csv_err)?;
    for r in rows {
        out.write_record([
            r.scenario_id.clone(),
            r.network.clone(),
            r.trust_scenario.clone(),
            fmt_float(r.tl),
            fmt_float(r.th),
            fmt_float(r.lambda_d),
            fmt_float(r.budget_frac),
            r.seeder.clone(),
            fmt_float(r.evac_frac_mean),
            fmt_float(r.evac_frac_stderr),
            fmt_float(r.regret_pct),
            r.wallclock_s.map(|s| format!("{s:.3}")).unwrap_or_default(),
        ])
        .map_err(crate::projection::csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Believer fractions of `reps` runs of the merged seed set. Run `r` uses
/// stream `rep/<r>` of `rng` for transmission and `rep/<r>/partition` for a
/// fresh assignment of the seeds to sources.
pub fn evaluate_merged(
    inst: &GeneralInstance,
    merged: &[NodeId],
    reps: usize,
    max_steps: usize,
    rng: &RngHandle,
) -> Result<Vec<f64>> {
    let n = inst.node_count() as f64;
    let budgets = inst.budgets();
    (0..reps.max(1))
        .into_par_iter()
        .map(|r| {
            let rep = rng.derive(format_args!("rep/{r}"));
            let seeding = partition_seeds(merged, &budgets, &rep.derive("partition"))?;
            let mut sim = Simulation::new(inst);
            sim.apply_seeding(&seeding)?;
            let out = sim.run_to_end(&mut rep.rng(), max_steps.max(1));
            Ok(out.believers as f64 / n)
        })
        .collect()
}

/// Merged seed set chosen by `seeder` on `inst`.
pub fn select_seeds(sc: &Scenario, seeder: SeederKind, inst: &GeneralInstance, rng: &RngHandle) -> Result<Vec<NodeId>> {
    let budgets = inst.budgets();
    let seeding = match seeder {
        SeederKind::Random => random_seeding(inst.node_count(), &budgets, rng)?,
        SeederKind::HighDegree => high_degree_seeding(&inst.graph, &budgets),
        SeederKind::ProjectedGreedy => {
            let omega = sc.omega.build(inst)?;
            let opts = ProjectionOptions {
                replications: sc.pg_replications,
                ..Default::default()
            };
            return Ok(projected_greedy(inst, &omega, &opts, rng)?.best_seeding().merged());
        }
    };
    Ok(seeding.merged())
}

/// Runs every seeder on every graph instance of `sc` and returns one row
/// per seeder with regret filled in. Samples from all graphs are pooled.
pub fn run_scenario(sc: &Scenario, rng: &RngHandle, timing: bool) -> Result<Vec<ResultRow>> {
    let wrap = |e: Error| Error::Scenario {
        scenario: sc.id.clone(),
        inner: Box::new(e),
    };
    sc.validate().map_err(wrap)?;
    let mut samples: Vec<Vec<f64>> = vec![Vec::new(); sc.seeders.len()];
    let mut seconds = vec![0.0; sc.seeders.len()];
    for g in 0..sc.graphs {
        let (graph, profiles) = sc.build_network(g, rng).map_err(wrap)?;
        let inst = sc.instance(graph, profiles);
        let graph_rng = rng.derive(format_args!("graph/{g}"));
        let eval_rng = graph_rng.derive("eval");
        for (i, &seeder) in sc.seeders.iter().enumerate() {
            let start = Instant::now();
            let seed_rng = graph_rng.derive(format_args!("seeder/{}", seeder.short_name()));
            let merged = select_seeds(sc, seeder, &inst, &seed_rng).map_err(wrap)?;
            seconds[i] += start.elapsed().as_secs_f64();
            samples[i].extend(evaluate_merged(&inst, &merged, sc.replications, sc.max_steps, &eval_rng).map_err(wrap)?);
        }
    }
    let (tl, th) = sc.thresholds.means();
    let mut rows: Vec<ResultRow> = sc
        .seeders
        .iter()
        .zip(samples)
        .zip(seconds)
        .map(|((seeder, xs), secs)| {
            let e = Estimate::from_samples(&xs);
            ResultRow {
                scenario_id: sc.id.clone(),
                network: sc.network.short_name().into(),
                trust_scenario: sc.trust.name().into(),
                tl,
                th,
                lambda_d: sc.lambda_d,
                budget_frac: sc.budget_frac,
                seeder: seeder.short_name().into(),
                evac_frac_mean: e.mean,
                evac_frac_stderr: e.stderr,
                regret_pct: 0.0,
                wallclock_s: timing.then_some(secs),
            }
        })
        .collect();
    apply_regret(&mut rows);
    Ok(rows)
}

/// Experiment file: a master seed and a list of scenarios.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub scenarios: Vec<Scenario>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            scenarios: vec![Scenario::default()],
        }
    }
}

/// Runs each expanded scenario in order. Every base scenario draws from
/// stream `scenario/<id>` so its budget and `λ_d` variants share graphs.
pub fn run_experiment(cfg: &ExperimentConfig, timing: bool) -> Result<Vec<ResultRow>> {
    let root = RngHandle::new(cfg.seed);
    let mut rows = Vec::new();
    for base in &cfg.scenarios {
        let rng = root.derive(format_args!("scenario/{}", base.id));
        for sc in base.expand() {
            rows.extend(run_scenario(&sc, &rng, timing)?);
        }
    }
    Ok(rows)
}

/// Evacuated fraction per threshold for one `λ_d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCurve {
    pub lambda_d: f64,
    pub points: Vec<(f64, Estimate)>,
    /// Threshold with the largest mean, ties to the smaller threshold.
    pub t_opt: f64,
}

/// Projected Greedy candidates for each threshold of `sc.omega`, evaluated
/// for every `λ_d` in `lambda_ds` on the same graphs and streams. Candidate
/// seeds do not depend on `λ_d`, so they are computed once per graph.
pub fn sweep_threshold(sc: &Scenario, lambda_ds: &[f64], rng: &RngHandle) -> Result<Vec<ThresholdCurve>> {
    sc.validate()?;
    let mut sums: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut thresholds: Vec<f64> = Vec::new();
    for g in 0..sc.graphs {
        let (graph, profiles) = sc.build_network(g, rng)?;
        let inst = sc.instance(graph, profiles);
        let omega = sc.omega.build(&inst)?;
        let graph_rng = rng.derive(format_args!("graph/{g}"));
        let candidates: Vec<Candidate> = projected_candidates(
            &inst,
            &omega,
            &ProjectionOptions::default(),
            &graph_rng.derive("seeder/PG"),
        )?;
        if g == 0 {
            thresholds = candidates.iter().map(|c| c.threshold).collect();
            sums = vec![vec![Vec::new(); thresholds.len()]; lambda_ds.len()];
        } else if candidates.len() != thresholds.len() {
            return Err(Error::param("threshold set differs between graph instances"));
        }
        let eval_rng = graph_rng.derive("eval");
        for (li, &ld) in lambda_ds.iter().enumerate() {
            let mut variant = inst.clone();
            variant.lambda_d = ld;
            for (ti, c) in candidates.iter().enumerate() {
                sums[li][ti].extend(evaluate_merged(
                    &variant,
                    &c.merged,
                    sc.replications,
                    sc.max_steps,
                    &eval_rng,
                )?);
            }
        }
    }
    Ok(lambda_ds
        .iter()
        .zip(sums)
        .map(|(&ld, per_t)| {
            let points: Vec<(f64, Estimate)> = thresholds
                .iter()
                .zip(per_t)
                .map(|(&t, xs)| (t, Estimate::from_samples(&xs)))
                .collect();
            let mut best = 0;
            for (i, p) in points.iter().enumerate() {
                if p.1.mean > points[best].1.mean {
                    best = i;
                }
            }
            ThresholdCurve {
                lambda_d: ld,
                t_opt: points[best].0,
                points,
            }
        })
        .collect())
}

/// `lambda_d,threshold,evac_frac_mean,evac_frac_stderr,is_best`.
pub fn write_curves_csv<W: Write>(w: W, curves: &[ThresholdCurve]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["lambda_d", "threshold", "evac_frac_mean", "evac_frac_stderr", "is_best"])
        .map_err(crate::projection::csv_err)?;
    for c in curves {
        for (t, e) in &c.points {
            out.write_record([
                fmt_float(c.lambda_d),
                fmt_float(*t),
                fmt_float(e.mean),
                fmt_float(e.stderr),
                u8::from(*t == c.t_opt).to_string(),
            ])
            .map_err(crate::projection::csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(seeder: &str, mean: f64) -> ResultRow {
        ResultRow {
            scenario_id: "s".into(),
            network: "RG".into(),
            trust_scenario: "homogeneous".into(),
            tl: 0.15,
            th: 0.55,
            lambda_d: 0.0,
            budget_frac: 0.05,
            seeder: seeder.into(),
            evac_frac_mean: mean,
            evac_frac_stderr: 0.0,
            regret_pct: f64::NAN,
            wallclock_s: None,
        }
    }

    #[test]
    fn regret_formula() {
        assert!((regret_pct(100.0, 80.0) - 20.0).abs() < 1e-12);
        assert_eq!(regret_pct(0.0, 0.0), 0.0);
        let mut rows = vec![row("R", 0.2), row("PG", 0.4)];
        apply_regret(&mut rows);
        assert_eq!(rows[1].regret_pct, 0.0);
        assert!((rows[0].regret_pct - 50.0).abs() < 1e-12);
        let mut single = vec![row("HD", 0.3)];
        apply_regret(&mut single);
        assert_eq!(single[0].regret_pct, 0.0);
    }

    #[test]
    fn budgets_split_evenly() {
        let sc = Scenario {
            nodes: 1003,
            ..Default::default()
        };
        assert_eq!(sc.budgets(), vec![10, 10, 10, 10, 10]);
        let sc = Scenario {
            nodes: 1000,
            budget_frac: 0.052,
            ..Default::default()
        };
        assert_eq!(sc.budgets(), vec![11, 11, 10, 10, 10]);
    }

    #[test]
    fn expansion_order_and_ids() {
        let sc = Scenario {
            id: "x".into(),
            budget_fracs: Some(vec![0.05, 0.5]),
            lambda_ds: Some(vec![0.0, 0.2]),
            ..Default::default()
        };
        let ids: Vec<String> = sc.expand().into_iter().map(|s| s.id).collect();
        assert_eq!(ids, vec!["x/b0.05/ld0", "x/b0.05/ld0.2", "x/b0.5/ld0", "x/b0.5/ld0.2"]);
    }

    #[test]
    fn invalid_budget_fraction() {
        let sc = Scenario {
            budget_frac: 0.0,
            ..Default::default()
        };
        assert!(sc.validate().is_err());
    }

    #[test]
    fn config_defaults_fill_in() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"seed": 3, "scenarios": [{"id": "a", "nodes": 200, "seeders": ["R", "high_degree"]}]}"#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.scenarios[0].nodes, 200);
        assert_eq!(
            cfg.scenarios[0].seeders,
            vec![SeederKind::Random, SeederKind::HighDegree]
        );
        assert_eq!(cfg.scenarios[0].transmit_p, 0.75);
    }

    #[test]
    fn small_scenario_runs() {
        let sc = Scenario {
            id: "tiny".into(),
            nodes: 200,
            replications: 3,
            graphs: 2,
            ..Default::default()
        };
        let rows = run_scenario(&sc, &RngHandle::new(1), false).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().any(|r| r.regret_pct == 0.0));
        let mut csv = Vec::new();
        write_results_csv(&mut csv, &rows).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().next().unwrap(), RESULT_COLUMNS.join(","));
        assert_eq!(rows, run_scenario(&sc, &RngHandle::new(1), false).unwrap());
    }
}
