use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use walker_verify::catalog;
use walker_verify::chart::max_residual;
use walker_verify::classify::Classifier;
use walker_verify::domain::{Sampler, DEFAULT_SEED};
use walker_verify::exec::Exec;
use walker_verify::gauge::{FlowTransform, Transform};

const MODES: [(&str, Exec); 2] = [("serial", Exec::Serial), ("parallel", Exec::Parallel)];

fn einstein(c: &mut Criterion) {
    let e = catalog::build("example2").unwrap();
    let g = e.walker().assemble().unwrap();
    let mut group = c.benchmark_group("einstein residual, example2");
    for n in [200, 1000] {
        for (label, exec) in MODES {
            let s = Sampler::new(n, DEFAULT_SEED).with_exec(exec);
            group.bench_with_input(BenchmarkId::new(label, n), &s, |b, s| {
                b.iter(|| max_residual(&g, -1.0, e.domain(), black_box(s)).unwrap())
            });
        }
    }
    group.finish();
}

fn holonomy(c: &mut Criterion) {
    let e = catalog::build("example4").unwrap();
    let classifier = Classifier::new(e.walker()).unwrap();
    let mut group = c.benchmark_group("holonomy verdict, example4");
    for (label, exec) in MODES {
        let s = Sampler::new(500, DEFAULT_SEED).with_exec(exec);
        group.bench_function(label, |b| {
            b.iter(|| classifier.holonomy_verdict(1.0, black_box(&s)).unwrap())
        });
    }
    group.finish();
}

fn flow(c: &mut Criterion) {
    let e = catalog::build("example1").unwrap();
    let original = catalog::build("example1-original").unwrap();
    let t = Transform::Flow(FlowTransform::from_walker(original.walker(), 0.0).unwrap());
    let params = e.params(-1.0);
    let mut group = c.benchmark_group("flow jacobians, example1");
    group.sample_size(20);
    for (label, exec) in MODES {
        let s = Sampler::new(500, DEFAULT_SEED).with_exec(exec);
        group.bench_function(label, |b| {
            b.iter(|| s.map(e.domain(), &params, |p| t.jacobian_at(p)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, einstein, holonomy, flow);
criterion_main!(benches);
