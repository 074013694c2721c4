use std::hint::black_box;

use bi_core::linalg::rat;
use bi_core::relations::verify_all_with;
use bi_core::{Execution, TensorSpace};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn verify(c: &mut Criterion) {
    let mus = [rat(1, 2), rat(1, 3), rat(1, 4), rat(1, 5)];
    let mut group = c.benchmark_group("verify_all");
    group.sample_size(10);
    for max_level in [3usize, 4] {
        let mut modes = vec![Execution::Sequential];
        if Execution::parallel_available() {
            modes.push(Execution::Parallel);
        }
        for exec in modes {
            group.bench_with_input(
                BenchmarkId::new(format!("{exec:?}"), max_level),
                &max_level,
                |b, &e| {
                    b.iter(|| {
                        // fresh space each time so the block cache starts cold
                        let space = TensorSpace::uniform(&mus, e).unwrap();
                        black_box(verify_all_with(&space, exec).unwrap())
                    })
                },
            );
        }
    }
    group.finish();
}

criterion_group!(benches, verify);
criterion_main!(benches);
