//! Threshold sets, the projection pipeline and the general-model greedy.

use std::sync::Arc;

use proptest::prelude::*;

use trustseed::gadgets::{non_submodular, query};
use trustseed::graphgen::{assign_trust, gen_random_group, TrustScenario};
use trustseed::projection::{
    build_simplified, homogeneous_from, projected_greedy, two_level_from, ProjectionOptions, ThresholdSet,
};
use trustseed::seeders::{actual_greedy, greedy_lazy_hybrid, greedy_maxmax, ActualGreedyOptions, HybridOptions};
use trustseed::{
    run, Budget, EvacuationDelay, GeneralInstance, NodeProfile, RngHandle, Seeding, SourceSpec, TrustGraph,
};

/// Every `a_high^i · a_low^j · info` at or above `t_min`, by double loop.
fn closure_oracle(a_high: f64, a_low: f64, info: f64, t_min: f64, t_max: f64) -> Vec<f64> {
    let mut out = vec![t_min, t_max];
    let mut i = 0;
    while info * a_high.powi(i) >= t_min {
        let mut j = 0;
        loop {
            let v = info * a_high.powi(i) * a_low.powi(j);
            if v < t_min {
                break;
            }
            if v <= t_max {
                out.push(v);
            }
            j += 1;
        }
        i += 1;
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
    out
}

fn same_set(got: &[f64], want: &[f64]) -> bool {
    got.len() == want.len() && got.iter().zip(want).all(|(a, b)| (a - b).abs() <= 1e-9)
}

#[test]
fn two_level_worked_example() {
    let got = two_level_from(0.9, 0.5, 1.0, 0.4, 1.0).thresholds;
    let want = closure_oracle(0.9, 0.5, 1.0, 0.4, 1.0);
    assert!(same_set(&got, &want), "{got:?} vs {want:?}");
    for listed in [
        1.0, 0.9, 0.5, 0.81, 0.45, 0.729, 0.6561, 0.59049, 0.531441, 0.4782969, 0.43046721, 0.4,
    ] {
        assert!(got.iter().any(|&t| (t - listed).abs() < 1e-12), "missing {listed}");
    }
    // 0.9 · 0.9 · 0.5 is also reached by the closure
    assert!(got.iter().any(|&t| (t - 0.405).abs() < 1e-12));
}

#[test]
fn extreme_homogeneous_set_size() {
    let omega = homogeneous_from(0.9, 1.0, 0.01, 0.99);
    assert!((42..=46).contains(&omega.len()), "|Ω| = {}", omega.len());
}

#[test]
fn collapsed_interval() {
    assert_eq!(homogeneous_from(0.7, 1.0, 0.3, 0.3).thresholds, vec![0.3]);
    assert_eq!(two_level_from(0.9, 0.5, 1.0, 0.3, 0.3).thresholds, vec![0.3]);
}

#[test]
fn equal_levels_match_homogeneous() {
    let a = two_level_from(0.8, 0.8, 0.95, 0.05, 0.9).thresholds;
    let b = homogeneous_from(0.8, 0.95, 0.05, 0.9).thresholds;
    assert!(same_set(&a, &b));
}

proptest! {
    #[test]
    fn two_level_matches_oracle(
        a_low in 0.2..0.8f64,
        gap in 0.01..0.19f64,
        info in 0.5..=1.0f64,
        t_min in 0.05..0.5f64,
        width in 0.0..0.5f64,
    ) {
        let a_high = a_low + gap;
        let t_max = t_min + width;
        let got = two_level_from(a_high, a_low, info, t_min, t_max);
        let want = closure_oracle(a_high, a_low, info, t_min, t_max);
        prop_assert!(same_set(&got.thresholds, &want), "{:?} vs {:?}", got.thresholds, want);
    }

    #[test]
    fn homogeneous_members(a in 0.05..0.99f64, info in 0.1..=1.0f64, t_min in 0.01..0.5f64, width in 0.0..0.5f64) {
        let t_max = t_min + width;
        let omega = homogeneous_from(a, info, t_min, t_max);
        let t = &omega.thresholds;
        prop_assert!(t.windows(2).all(|w| w[1] - w[0] > 1e-12));
        prop_assert!(t.iter().all(|&x| x >= t_min && x <= t_max));
        prop_assert_eq!(t[0], t_min);
        prop_assert_eq!(*t.last().unwrap(), t_max);
        for &x in &t[1..t.len().saturating_sub(1)] {
            let i = ((x / info).ln() / a.ln()).round() as i32;
            prop_assert!((info * a.powi(i) - x).abs() < 1e-9);
        }
        let mut i = 0;
        while info * a.powi(i) >= t_min {
            let v = info * a.powi(i);
            if v <= t_max {
                prop_assert!(t.iter().any(|&x| (x - v).abs() < 1e-9));
            }
            i += 1;
        }
    }
}

fn network(n: usize, seed: u64) -> Arc<TrustGraph> {
    let rng = RngHandle::new(seed);
    let g = gen_random_group(n, 4.0, 2.0, &rng.derive("structure")).unwrap();
    Arc::new(
        assign_trust(
            &g,
            &TrustScenario::GroupVariable { a: 0.8, epsilon: 0.05 },
            &rng.derive("trust"),
        )
        .unwrap(),
    )
}

fn degenerate(graph: Arc<TrustGraph>, t: f64, budget: usize) -> GeneralInstance {
    GeneralInstance {
        profiles: vec![NodeProfile::single(t); graph.node_count()],
        graph,
        sources: vec![SourceSpec::uniform(0.95, budget, 0.9)],
        lambda_d: 0.0,
        lambda_s: 0.0,
        tau: EvacuationDelay::Never,
        transmit_p: 1.0,
    }
}

#[test]
fn exact_projection_reproduces_greedy_coverage() {
    for (seed, t) in [(1, 0.3), (2, 0.5), (3, 0.6)] {
        let inst = degenerate(network(400, seed), t, 8);
        let omega = ThresholdSet::explicit(vec![t], t, t);
        let report = projected_greedy(&inst, &omega, &ProjectionOptions::default(), &RngHandle::new(seed)).unwrap();
        assert_eq!(report.rows.len(), 1);
        let sinst = build_simplified(&inst, t).unwrap();
        let greedy = greedy_maxmax(&sinst, &Budget::PerSource(vec![8]));
        assert_eq!(report.best_estimate().mean, greedy.covered as f64);
        assert_eq!(report.best_estimate().stderr, 0.0);
        assert_eq!(report.best_seeding(), &greedy.seeding);
    }
}

#[test]
fn report_invariants() {
    let graph = network(300, 9);
    let n = graph.node_count();
    let inst = GeneralInstance {
        profiles: vec![NodeProfile::new(0.15, 0.55); n],
        graph,
        sources: vec![SourceSpec::uniform(0.95, 4, 0.9), SourceSpec::uniform(0.8, 3, 0.9)],
        lambda_d: 0.1,
        lambda_s: 0.0,
        tau: EvacuationDelay::Steps(5),
        transmit_p: 0.75,
    };
    let omega = ThresholdSet::grid(0.1, 0.6, 0.05).unwrap();
    let opts = ProjectionOptions {
        replications: 8,
        hybrid: HybridOptions::default(),
    };
    let rng = RngHandle::new(5);
    let report = projected_greedy(&inst, &omega, &opts, &rng).unwrap();
    assert_eq!(report.rows.len(), omega.len());
    let best = report.best_estimate().mean;
    for (i, row) in report.rows.iter().enumerate() {
        row.candidate.seeding.check(n, &[4, 3]).unwrap();
        assert!(row.estimate.mean <= best);
        if row.estimate.mean == best {
            assert!(i >= report.best);
        }
    }
    assert_eq!(report, projected_greedy(&inst, &omega, &opts, &rng).unwrap());
}

#[test]
fn actual_greedy_on_degenerate_instance_is_plain_greedy() {
    for seed in 0..4 {
        let inst = degenerate(network(60, 100 + seed), 0.45, 4);
        let sinst = build_simplified(&inst, 0.45).unwrap();
        let opts = ActualGreedyOptions {
            replications: 1,
            ..Default::default()
        };
        let actual = actual_greedy(&inst, &Budget::PerSource(vec![4]), &opts, &RngHandle::new(seed)).unwrap();
        let plain = greedy_lazy_hybrid(&sinst, &Budget::PerSource(vec![4]), &HybridOptions::default());
        assert_eq!(actual, plain.seeding);
    }
}

#[test]
fn actual_greedy_on_query_gadget() {
    // {a, b} is the pair that needs both; greedy does at least as well
    let k = 3;
    let inst = non_submodular(k, 2);
    let opts = ActualGreedyOptions {
        replications: 1,
        ..Default::default()
    };
    let s = actual_greedy(&inst, &Budget::PerSource(vec![2]), &opts, &RngHandle::new(0)).unwrap();
    let got = run(&inst, &s, &RngHandle::new(0), 50).unwrap().believers;
    let pair = run(&inst, &Seeding::single([query::A, query::B]), &RngHandle::new(0), 50)
        .unwrap()
        .believers;
    assert_eq!(pair, k + 4);
    assert!(got >= pair, "greedy seeding {s:?} converts {got}");
}
