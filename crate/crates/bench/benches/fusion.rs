use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use obsinfo::experiments::generate_synthetic;
use obsinfo::fusion::fine_grained_subset;
use obsinfo::{FusionKind, FusionMethod, RankedList, RunId, SynthConfig};

fn bench_fusion(c: &mut Criterion) {
    let data = generate_synthetic(&SynthConfig { topics: 1, ..SynthConfig::default() }).unwrap();
    let topic = data.topics.into_values().next().unwrap();
    let runs: Vec<(RunId, RankedList)> = topic.runs.into_iter().collect();
    let mut group = c.benchmark_group("fuse");
    for kind in [FusionKind::Oiq, FusionKind::Borda, FusionKind::BordaLog] {
        let method = FusionMethod::new(kind, 100).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(kind), &method, |b, m| {
            b.iter(|| m.fuse(black_box(&runs), &topic.collection).unwrap())
        });
    }
    group.finish();
    let pivot = runs[0].0.clone();
    c.bench_function("fine_grained_subset", |b| {
        b.iter(|| fine_grained_subset(black_box(&runs), &pivot, &topic.collection).unwrap())
    });
}

criterion_group!(benches, bench_fusion);
criterion_main!(benches);
