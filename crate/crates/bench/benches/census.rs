use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use netrand::motif::census_oracle;
use netrand::{gen_er, motif_census, ErParams, Seed};

fn census(c: &mut Criterion) {
    let mut group = c.benchmark_group("census");
    for n in [25, 50, 100] {
        let g = gen_er(&ErParams::new(n, 0.3).unwrap(), Seed(1)).unwrap();
        group.bench_with_input(BenchmarkId::new("fast", n), &g, |b, g| b.iter(|| motif_census(black_box(g))));
    }
    let g = gen_er(&ErParams::new(25, 0.3).unwrap(), Seed(1)).unwrap();
    group.bench_function("oracle/25", |b| b.iter(|| census_oracle(black_box(&g))));
    group.finish();
}

criterion_group!(benches, census);
criterion_main!(benches);
