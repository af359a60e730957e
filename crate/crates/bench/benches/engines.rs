use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use trustseed::graphgen::{assign_trust, gen_random_group, TrustScenario};
use trustseed::maxmax::CoverageSearch;
use trustseed::seeders::{greedy_lazy_hybrid, greedy_maxmax, Budget, HybridOptions};
use trustseed::{
    run, EvacuationDelay, GeneralInstance, NodeProfile, RngHandle, Seeding, SimplifiedInstance, SourceSpec, Thresholds,
    TrustGraph,
};

fn network(n: usize) -> Arc<TrustGraph> {
    let rng = RngHandle::new(7);
    let g = gen_random_group(n, 4.0, 2.0, &rng.derive("g")).unwrap();
    Arc::new(assign_trust(&g, &TrustScenario::GroupVariable { a: 0.7, epsilon: 0.05 }, &rng).unwrap())
}

fn simplified(graph: Arc<TrustGraph>, budget: usize) -> SimplifiedInstance {
    SimplifiedInstance {
        graph,
        thresholds: Thresholds::Uniform(0.3),
        sources: vec![SourceSpec::uniform(0.95, budget, 0.9)],
    }
}

fn singleton(c: &mut Criterion) {
    let s = simplified(network(10_000), 1);
    let mut search = CoverageSearch::new(s.node_count());
    let mut out = Vec::new();
    let mut u = 0;
    c.bench_function("singleton_coverage/n=10000", |b| {
        b.iter(|| {
            u = (u + 1) % 10_000;
            search.run(&s, u, 0, &mut out);
            black_box(out.len())
        })
    });
}

fn greedy(c: &mut Criterion) {
    let s = simplified(network(2_000), 100);
    let budget = Budget::PerSource(vec![100]);
    let mut group = c.benchmark_group("greedy/n=2000,B=100");
    group.sample_size(10);
    group.bench_function("plain", |b| b.iter(|| black_box(greedy_maxmax(&s, &budget).covered)));
    group.bench_function("lazy_hybrid", |b| {
        b.iter(|| black_box(greedy_lazy_hybrid(&s, &budget, &HybridOptions::default()).covered))
    });
    group.finish();
}

fn diffusion(c: &mut Criterion) {
    let graph = network(10_000);
    let inst = GeneralInstance {
        profiles: vec![NodeProfile::new(0.15, 0.55); graph.node_count()],
        graph,
        sources: (0..5).map(|_| SourceSpec::uniform(0.95, 100, 0.9)).collect(),
        lambda_d: 0.1,
        lambda_s: 0.0,
        tau: EvacuationDelay::Steps(5),
        transmit_p: 0.75,
    };
    let seeding = Seeding::from_sets(
        (0..5)
            .map(|k| (0..100).map(|i| (k * 1000 + i * 7).into()).collect())
            .collect(),
    );
    let mut rep = 0u64;
    c.bench_function("diffusion_run/n=10000,K=5", |b| {
        b.iter_batched(
            || {
                rep += 1;
                RngHandle::new(rep)
            },
            |rng| black_box(run(&inst, &seeding, &rng, 50).unwrap().believers),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, singleton, greedy, diffusion);
criterion_main!(benches);
