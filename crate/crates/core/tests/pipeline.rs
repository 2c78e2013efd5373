//! Cross-module pipeline checks: full runs through problem -> operator ->
//! schedule -> engine -> analysis on non-quadratic instances.

use asynciter::analysis::{self, BlockNorm};
use asynciter::engine::{self, ExchangePolicy};
use asynciter::operators::ProxGradientOperator;
use asynciter::problem::{random_dataset, BlockPartition, NonsmoothPart, Problem, SmoothPart};
use asynciter::schedule::{self, generate, ScheduleKind};
use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn elastic_net(dim: usize, samples: usize, ridge: f64, lambda: f64, seed: u64) -> Problem {
    let data = random_dataset(samples, dim, seed).unwrap();
    Problem::new(
        SmoothPart::ridge_least_squares(data, ridge).unwrap(),
        NonsmoothPart::l1(lambda).unwrap(),
        BlockPartition::contiguous(dim, 2).unwrap(),
        None,
    )
    .unwrap()
}

#[test]
fn elastic_net_baudet_interpolation_meets_rate_bound() {
    let problem = elastic_net(10, 80, 0.5, 0.05, 7);
    let op = ProxGradientOperator::new(problem.clone(), 1).unwrap();
    let reference = problem.reference_fixed_point(1e-13).unwrap();
    let s = generate(ScheduleKind::Baudet, 2, 1500, 0).unwrap();
    assert!(schedule::validate(&s).overall);
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let x0 = Array1::from_shape_fn(problem.dim(), |_| rng.gen_range(-2.0..2.0));
    let trace = engine::run(&op, &x0, &s, ExchangePolicy::Interpolate { theta: 0.5 }).unwrap();
    let ms = analysis::macro_iterations(&trace);
    assert!(ms.closed() >= 15, "only {} macro-iterations", ms.closed());
    let norm = BlockNorm::ones(problem.n_blocks());
    let norms = analysis::verify_norm_constraint(&trace, &reference.z, &norm).unwrap();
    assert!(norms.pass, "norm constraint worst slack {:e}", norms.worst_slack);
    let rate = analysis::verify_rate_bound(&trace, &reference.z, &ms, problem.rho()).unwrap();
    assert!(rate.report.pass, "rate bound worst slack {:e}", rate.report.worst_slack);
}
