//! Compares behavior enumeration on a single-thread rayon pool against
//! the default pool (and plain sequential iteration when the `parallel`
//! feature is off, in which case both measurements coincide).

use criterion::{criterion_group, criterion_main, Criterion};

use tpa::automata::{behaviors, Alphabet};
use tpa::builtins::fair_merge;

fn enumeration(c: &mut Criterion) {
    let alphabet = Alphabet::of(&["a", "b"]);
    let fm = fair_merge(&alphabet, 1);
    let horizon = 3;
    let budget = 10_000_000;

    let mut group = c.benchmark_group("fair_merge_behaviors");

    #[cfg(feature = "parallel")]
    {
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("pool");
        group.bench_function("one_thread", |b| {
            b.iter(|| single.install(|| behaviors(&fm, horizon, budget).unwrap().len()))
        });
        group.bench_function("default_pool", |b| {
            b.iter(|| behaviors(&fm, horizon, budget).unwrap().len())
        });
    }

    #[cfg(not(feature = "parallel"))]
    {
        group.bench_function("sequential", |b| {
            b.iter(|| behaviors(&fm, horizon, budget).unwrap().len())
        });
    }

    group.finish();
}

criterion_group!(benches, enumeration);
criterion_main!(benches);
