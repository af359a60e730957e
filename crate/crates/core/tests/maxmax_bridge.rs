//! The max-max model is the general model with `λ = 0`, single thresholds,
//! no evacuation and certain transmission. Union coverage must equal the
//! simulated believer set node for node.

use std::sync::Arc;

use proptest::prelude::*;

use trustseed::maxmax::union_coverage;
use trustseed::{
    EvacuationDelay, GeneralInstance, NodeId, NodeProfile, NodeTrust, RngHandle, Seeding, SimplifiedInstance,
    Simulation, SourceSpec, Thresholds, TrustArc, TrustGraph,
};

#[derive(Debug, Clone)]
struct Case {
    graph: Arc<TrustGraph>,
    thresholds: Vec<f64>,
    sources: Vec<SourceSpec>,
    seeding: Seeding,
}

fn case_strategy() -> impl Strategy<Value = Case> {
    (2..=40usize, 1..=3usize, any::<bool>()).prop_flat_map(|(n, k, symmetric)| {
        (
            proptest::collection::vec((0..n, 0..n, 0.2..=1.0f64), 0..(3 * n)),
            proptest::collection::vec(0.05..0.95f64, n),
            proptest::collection::vec((0.5..=1.0f64, proptest::collection::vec(0.5..=1.0f64, n)), k),
            proptest::collection::vec(proptest::collection::vec(0..n, 0..=3), k),
        )
            .prop_map(move |(pairs, thresholds, sources, seeds)| {
                let mut seen = std::collections::HashSet::new();
                let pairs: Vec<_> = pairs
                    .into_iter()
                    .filter(|&(a, b, _)| a != b && seen.insert((a.min(b), a.max(b))))
                    .collect();
                let graph = if symmetric {
                    TrustGraph::from_edges(n, pairs, vec![0; n]).unwrap()
                } else {
                    let arcs = pairs
                        .into_iter()
                        .map(|(a, b, t)| TrustArc {
                            src: a.into(),
                            dst: b.into(),
                            trust: t,
                        })
                        .collect();
                    TrustGraph::new(n, arcs, vec![0; n], false).unwrap()
                };
                let seeding = Seeding::from_sets(
                    seeds
                        .into_iter()
                        .map(|s| s.into_iter().map(NodeId::from).collect())
                        .collect(),
                );
                let sources = sources
                    .into_iter()
                    .zip(seeding.sets())
                    .map(|((info, trust), set)| SourceSpec {
                        info_value: info,
                        budget: set.len(),
                        node_trust: NodeTrust::PerNode(trust),
                    })
                    .collect();
                Case {
                    graph: Arc::new(graph),
                    thresholds,
                    sources,
                    seeding,
                }
            })
    })
}

fn believers(c: &Case) -> Vec<NodeId> {
    let inst = GeneralInstance {
        graph: Arc::clone(&c.graph),
        profiles: c.thresholds.iter().map(|&t| NodeProfile::single(t)).collect(),
        sources: c.sources.clone(),
        lambda_d: 0.0,
        lambda_s: 0.0,
        tau: EvacuationDelay::Never,
        transmit_p: 1.0,
    };
    let mut sim = Simulation::new(&inst);
    sim.apply_seeding(&c.seeding).unwrap();
    let out = sim.run_to_end(&mut RngHandle::new(0).rng(), 1000);
    assert!(out.converged);
    sim.believer_set()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(250))]

    #[test]
    fn union_coverage_is_the_believer_set(c in case_strategy()) {
        let sinst = SimplifiedInstance {
            graph: Arc::clone(&c.graph),
            thresholds: Thresholds::PerNode(c.thresholds.clone()),
            sources: c.sources.clone(),
        };
        let (count, set) = union_coverage(&sinst, &c.seeding);
        let sim = believers(&c);
        prop_assert_eq!(count, set.len());
        prop_assert_eq!(set, sim);
    }
}
