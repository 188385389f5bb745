use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use uavcic::montecarlo::{run_trials_with, Execution};
use uavcic::ScenarioConfig;

fn bench_execution(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_trials");
    group.sample_size(10);
    for &n in &[200u64, 2000] {
        let cfg = ScenarioConfig {
            n_trials: n,
            ..ScenarioConfig::default()
        };
        for exec in [Execution::Sequential, Execution::Parallel] {
            let label = match exec {
                Execution::Sequential => "sequential",
                Execution::Parallel => "parallel",
            };
            group.bench_with_input(BenchmarkId::new(label, n), &cfg, |b, cfg| {
                b.iter(|| run_trials_with(cfg, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_execution);
criterion_main!(benches);
