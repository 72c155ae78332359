use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fbm_mle::{replicate, Execution, HurstExponent, ModelParams, SamplerKind, SamplingGrid};

fn replications(c: &mut Criterion) {
    let mut group = c.benchmark_group("replicate");
    group.sample_size(10);
    let truth = ModelParams::new(0.788, 0.8116, HurstExponent::new(0.75).unwrap()).unwrap();
    for &(n, sampler) in &[(256usize, SamplerKind::Cholesky), (1000, SamplerKind::DaviesHarte)] {
        let grid = SamplingGrid::new(1.0, n).unwrap();
        for (label, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_with_input(BenchmarkId::new(format!("{sampler}/{label}"), n), &exec, |b, &exec| {
                b.iter(|| replicate(&truth, &grid, sampler, 200, 1, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, replications);
criterion_main!(benches);
