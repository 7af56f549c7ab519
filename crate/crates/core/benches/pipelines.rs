use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hhi_core::euler::euler_class_compact;
use hhi_core::invariants::{invariant_direct, InvariantKey};
use hhi_core::recursion::{CombRecursion, Enumeration};
use hhi_core::{par, OrbifoldData};

fn c3z3(n: usize) -> OrbifoldData {
    OrbifoldData::new(3, &[1, 1, 1], &vec![1; n]).unwrap()
}

/// `None` runs on the global pool.
fn on_threads(threads: Option<usize>, f: impl FnOnce() + Send) {
    match threads {
        Some(t) => par::with_threads(t, f),
        None => f(),
    }
}

/// Each pipeline on the default pool and pinned to one thread.
fn pipelines(c: &mut Criterion) {
    let threads = [("parallel", None), ("sequential", Some(1))];
    let euler_data = OrbifoldData::new(5, &[1, 2, 2], &[1, 2, 1, 2, 1, 3, 0]).unwrap();
    let comb_key = InvariantKey::primary(c3z3(10));
    let direct_key = InvariantKey::primary(c3z3(7));

    let mut g = c.benchmark_group("euler_compact_n7");
    for (name, t) in threads {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            on_threads(t, || b.iter(|| euler_class_compact(black_box(&euler_data)).unwrap()))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("comb_generic_n10");
    g.sample_size(10);
    for (name, t) in threads {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            on_threads(t, || b.iter(|| CombRecursion::new(Enumeration::Generic).value(black_box(&comb_key)).unwrap()))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("direct_n7");
    g.sample_size(10);
    for (name, t) in threads {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            on_threads(t, || b.iter(|| invariant_direct(black_box(&direct_key)).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, pipelines);
criterion_main!(benches);
