use criterion::{black_box, criterion_group, criterion_main, Criterion};
use grigwalk::measures::{build_eta0, MixtureSampler};
use grigwalk::par;
use grigwalk::walk_lab::{run_walk, WalkOptions};
use grigwalk::OmegaString;

const TRIALS: usize = 64;
const STEPS: usize = 2_000;

fn flips(sampler: &MixtureSampler, i: usize) -> usize {
    run_walk(sampler, STEPS, par::task_seed(1, i), WalkOptions::default()).unwrap().flips.len()
}

fn bench_trials(c: &mut Criterion) {
    let sampler = build_eta0(&OmegaString::first_group(), 1.0, 16).unwrap().with_generators().unwrap();
    let mut g = c.benchmark_group("walk_trials");
    g.sample_size(10);
    g.bench_function("sequential", |b| b.iter(|| black_box(par::map_range_seq(TRIALS, |i| flips(&sampler, i)))));
    #[cfg(feature = "parallel")]
    g.bench_function("rayon", |b| b.iter(|| black_box(par::map_range_par(TRIALS, |i| flips(&sampler, i)))));
    g.finish();
}

criterion_group!(benches, bench_trials);
criterion_main!(benches);
