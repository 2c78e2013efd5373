//! Compares the sequential and rayon-backed batch paths on the two
//! data-parallel workloads: multi-seed asynchronous runs and Monte Carlo
//! contraction checks.

use asynciter::analysis::{self, BlockNorm};
use asynciter::batch;
use asynciter::engine::{self, ExchangePolicy};
use asynciter::operators::ProxGradientOperator;
use asynciter::problem::{random_spd_quadratic, BlockPartition, NonsmoothPart, Problem};
use asynciter::schedule::{generate, ScheduleKind};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bench_problem() -> Problem {
    Problem::new(
        random_spd_quadratic(30, 1.0, 50.0, 0.25, 7).unwrap(),
        NonsmoothPart::l1(0.05).unwrap(),
        BlockPartition::contiguous(30, 6).unwrap(),
        None,
    )
    .unwrap()
}

fn seed_pipeline(op: &ProxGradientOperator, z: &Array1<f64>, rho: f64, seed: u64) -> bool {
    let schedule = generate(ScheduleKind::Bounded { b: 5 }, 6, 300, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = Array1::from_shape_fn(30, |_| rng.gen_range(-2.0..2.0));
    let trace = engine::run(op, &x0, &schedule, ExchangePolicy::Exact).unwrap();
    let ms = analysis::macro_iterations(&trace);
    let norm = BlockNorm::ones(6);
    let rate = analysis::verify_rate_bound(&trace, z, &ms, rho).unwrap();
    let norms = analysis::verify_norm_constraint(&trace, z, &norm).unwrap();
    rate.report.pass && norms.pass
}

fn multi_seed_runs(c: &mut Criterion) {
    let problem = bench_problem();
    let op = ProxGradientOperator::new(problem.clone(), 1).unwrap();
    let reference = problem.reference_fixed_point(1e-12).unwrap();
    let seeds: Vec<u64> = (0..16).collect();
    let mut group = c.benchmark_group("multi_seed_runs");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("sequential", seeds.len()), |b| {
        b.iter(|| {
            batch::map_sequential(&seeds, |&s| {
                seed_pipeline(&op, &reference.z, problem.rho(), s)
            })
        })
    });
    group.bench_function(BenchmarkId::new("parallel", seeds.len()), |b| {
        b.iter(|| batch::map(&seeds, 0, |&s| seed_pipeline(&op, &reference.z, problem.rho(), s)))
    });
    group.finish();
}

fn contraction_batch(c: &mut Criterion) {
    let problem = bench_problem();
    let op = ProxGradientOperator::new(problem, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let pairs: Vec<(Array1<f64>, Array1<f64>)> = (0..1000)
        .map(|_| {
            (
                Array1::from_shape_fn(30, |_| rng.gen_range(-5.0..5.0)),
                Array1::from_shape_fn(30, |_| rng.gen_range(-5.0..5.0)),
            )
        })
        .collect();
    let bound = op.contraction_bound();
    let check = |(x, y): &(Array1<f64>, Array1<f64>)| {
        let d_out = op.apply(x).unwrap() - op.apply(y).unwrap();
        let d_in = x - y;
        d_out.dot(&d_out).sqrt() <= (bound + 1e-12) * d_in.dot(&d_in).sqrt()
    };
    let mut group = c.benchmark_group("contraction_batch");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("sequential", pairs.len()), |b| {
        b.iter(|| batch::map_sequential(&pairs, check))
    });
    group.bench_function(BenchmarkId::new("parallel", pairs.len()), |b| {
        b.iter(|| batch::map(&pairs, 0, check))
    });
    group.finish();
}

criterion_group!(benches, multi_seed_runs, contraction_batch);
criterion_main!(benches);
