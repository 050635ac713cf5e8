use criterion::{criterion_group, criterion_main, Criterion};
use noisy_sysid::experiment::{builtin_config, run_experiment_with, BuiltinConfig, Execution};

fn sequential_vs_parallel(c: &mut Criterion) {
    let mut cfg = builtin_config(BuiltinConfig::PaperAutonomous);
    cfg.t_grid = vec![250, 1000];
    cfg.trials = 8;

    let mut group = c.benchmark_group("paper-autonomous");
    group.sample_size(10);
    for (name, mode) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_function(name, |b| b.iter(|| run_experiment_with(&cfg, mode).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, sequential_vs_parallel);
criterion_main!(benches);
