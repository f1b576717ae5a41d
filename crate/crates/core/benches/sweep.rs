use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use neuroenergy::sweep::{self, SweepSettings};

fn grids(c: &mut Criterion) {
    let mut settings = SweepSettings::default();
    settings.protocol.duration = 250.0;
    let temperature = [24.0, 30.0, 36.0, 40.0];
    let stimulus = [2.25, 5.0, 7.5, 10.0];

    let mut group = c.benchmark_group("sweep_4x4");
    group.sample_size(10);
    for cell in [4u32, 9, 10] {
        group.bench_with_input(BenchmarkId::new("sequential", cell), &cell, |b, &id| {
            b.iter(|| sweep::run_sweep_sequential(id, &temperature, &stimulus, &settings).unwrap())
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", cell), &cell, |b, &id| {
            b.iter(|| sweep::run_sweep_parallel(id, &temperature, &stimulus, &settings).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, grids);
criterion_main!(benches);
