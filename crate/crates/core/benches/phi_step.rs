use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kltrace::distributivity::DistLaw;
use kltrace::functors::FunctorExpr;
use kltrace::gen::{exhaustive_lts, Sampler};
use kltrace::monads::MonadTag;
use kltrace::par::{map_range, Execution};
use kltrace::system::System;
use kltrace::traces::{finite_trace_with, trace_oracle_lts};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn wide_system(tag: MonadTag, n: usize) -> System {
    let mut s = Sampler::new(7);
    s.support = 3;
    s.system(tag, &FunctorExpr::lts(["a", "b"]), n)
}

fn finite_trace_modes(c: &mut Criterion) {
    let mut group = c.benchmark_group("finite_trace");
    for tag in [MonadTag::Powerset, MonadTag::Subdist] {
        let sys = wide_system(tag, 24);
        let law = DistLaw::canonical(tag, sys.functor().clone()).unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, tag), &exec, |b, exec| {
                b.iter(|| finite_trace_with(&sys, &law, 6, *exec).unwrap())
            });
        }
    }
    group.finish();
}

fn sweep_modes(c: &mut Criterion) {
    let systems = exhaustive_lts(MonadTag::Powerset, 2);
    let mut group = c.benchmark_group("oracle_sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                map_range(exec, systems.len(), |i| {
                    let sys = &systems[i];
                    let law = DistLaw::canonical(sys.tag(), sys.functor().clone()).unwrap();
                    finite_trace_with(sys, &law, 4, Execution::Sequential).unwrap()
                        == trace_oracle_lts(sys, 4).unwrap()
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, finite_trace_modes, sweep_modes);
criterion_main!(benches);
