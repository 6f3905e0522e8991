use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sdc_core::analysis::{sweep, NGrid, Growth, SweepConfig, SweepKind};
use sdc_core::operator::clear_moment_cache;
use sdc_core::{BnRule, Execution, TaylorFunction};
use std::hint::black_box;

fn strategies() -> Vec<(&'static str, Execution)> {
    vec![
        ("sequential", Execution::Sequential),
        #[cfg(feature = "parallel")]
        ("parallel", Execution::Parallel),
    ]
}

fn bench_sweeps(c: &mut Criterion) {
    let f = TaylorFunction::cosh_sqrt(0.2, 1.0, None, None).unwrap();
    let ns = NGrid { start: 4, stop: 256, growth: Growth::Linear }.values().unwrap();
    let kinds = [
        ("upper", SweepKind::Upper),
        ("voronovskaja", SweepKind::Voronovskaja),
        ("derivative", SweepKind::Derivative { p: 1, r1: 2.0 }),
    ];
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (kind_name, kind) in kinds {
        for (name, exec) in strategies() {
            let cfg = SweepConfig::new(BnRule::Sqrt, ns.clone(), 1.5, kind).with_exec(exec);
            group.bench_with_input(BenchmarkId::new(kind_name, name), &cfg, |b, cfg| {
                b.iter(|| {
                    clear_moment_cache();
                    black_box(sweep(&f, cfg).unwrap())
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_sweeps);
criterion_main!(benches);
