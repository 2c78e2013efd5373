//! Fixed-point operators built from a problem instance.
//!
//! The base step maps `x` to `prox(x) - gamma * grad f(prox(x))` (prox first,
//! then the gradient step). [`ProxGradientOperator`] composes that step
//! `inner_steps` times; with one inner step it is the plain base operator.
//! Its fixed point `z*` differs from the minimizer when `g != 0`; the
//! minimizer is recovered as `prox(z*)`.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::problem::Problem;

/// Prox-then-gradient fixed-point operator with an inner iteration count.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxGradientOperator {
    problem: Problem,
    inner_steps: usize,
}

impl ProxGradientOperator {
    pub fn new(problem: Problem, inner_steps: usize) -> Result<Self> {
        if inner_steps == 0 {
            return Err(Error::input("inner_steps must be at least 1"));
        }
        Ok(Self { problem, inner_steps })
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn inner_steps(&self) -> usize {
        self.inner_steps
    }

    /// Applies the `inner_steps`-fold composition of the base step.
    pub fn apply(&self, x: &Array1<f64>) -> Result<Array1<f64>> {
        if x.len() != self.problem.dim() {
            return Err(Error::input(format!(
                "vector has dimension {}, operator expects {}",
                x.len(),
                self.problem.dim()
            )));
        }
        let cur = self.apply_steps(x, self.inner_steps);
        if cur.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                iteration: 0,
                context: "operator application overflowed; instance likely mis-scaled".into(),
            });
        }
        Ok(cur)
    }

    /// Base step composed `steps` times, without the finiteness check.
    pub(crate) fn apply_steps(&self, x: &Array1<f64>, steps: usize) -> Array1<f64> {
        let mut cur = self.problem.base_step(x);
        for _ in 1..steps {
            cur = self.problem.base_step(&cur);
        }
        cur
    }

    /// `(1 - gamma*mu)^inner_steps`, the Euclidean contraction factor of the
    /// composed operator; equals `((L - mu)/(L + mu))^m` at the default step.
    pub fn contraction_bound(&self) -> f64 {
        (1.0 - self.problem.rho()).powi(self.inner_steps as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{
        diag_quadratic, random_dataset, random_spd_quadratic, BlockPartition, NonsmoothPart,
        SmoothPart,
    };
    use ndarray::{array, Array1};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn op_1d() -> ProxGradientOperator {
        let p = Problem::new(
            diag_quadratic(&[1.0], &[0.0]).unwrap(),
            NonsmoothPart::Zero,
            BlockPartition::singletons(1).unwrap(),
            Some(1.0),
        )
        .unwrap();
        ProxGradientOperator::new(p, 1).unwrap()
    }

    fn elastic_net_op(inner_steps: usize) -> ProxGradientOperator {
        let data = random_dataset(20, 10, 7).unwrap();
        let p = Problem::new(
            SmoothPart::ridge_least_squares(data, 0.5).unwrap(),
            NonsmoothPart::l1(0.05).unwrap(),
            BlockPartition::contiguous(10, 2).unwrap(),
            None,
        )
        .unwrap();
        ProxGradientOperator::new(p, inner_steps).unwrap()
    }

    #[test]
    fn one_step_quadratic_lands_on_fixed_point() {
        let op = op_1d();
        assert_eq!(op.apply(&array![5.0]).unwrap(), array![0.0]);
    }

    #[test]
    fn diagonal_example() {
        let p = Problem::new(
            diag_quadratic(&[1.0, 3.0], &[0.0, 0.0]).unwrap(),
            NonsmoothPart::Zero,
            BlockPartition::singletons(2).unwrap(),
            Some(0.5),
        )
        .unwrap();
        let op = ProxGradientOperator::new(p, 1).unwrap();
        assert_eq!(op.apply(&array![4.0, 2.0]).unwrap(), array![2.0, -1.0]);
    }

    #[test]
    fn inner_steps_compose_exactly() {
        let op3 = elastic_net_op(3);
        let op1 = elastic_net_op(1);
        let x = Array1::from_shape_fn(10, |i| (i as f64) - 4.5);
        let composed = op1
            .apply(&op1.apply(&op1.apply(&x).unwrap()).unwrap())
            .unwrap();
        assert_eq!(op3.apply(&x).unwrap(), composed);
    }

    #[test]
    fn contraction_bound_examples() {
        let mk = |mu: f64, l: f64, gamma: f64, m: usize| {
            let p = Problem::new(
                diag_quadratic(&[mu, l], &[0.0, 0.0]).unwrap(),
                NonsmoothPart::Zero,
                BlockPartition::singletons(2).unwrap(),
                Some(gamma),
            )
            .unwrap();
            ProxGradientOperator::new(p, m).unwrap().contraction_bound()
        };
        assert_eq!(mk(1.0, 3.0, 0.5, 1), 0.5);
        assert_eq!(mk(1.0, 3.0, 0.5, 2), 0.25);

        let endpoint = Problem::new(
            diag_quadratic(&[1.0], &[0.0]).unwrap(),
            NonsmoothPart::Zero,
            BlockPartition::singletons(1).unwrap(),
            Some(1.0),
        )
        .unwrap();
        assert_eq!(ProxGradientOperator::new(endpoint, 1).unwrap().contraction_bound(), 0.0);
    }

    #[test]
    fn empirical_contraction_on_random_pairs() {
        let ops = vec![elastic_net_op(1), elastic_net_op(2)];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for op in &ops {
            let bound = op.contraction_bound();
            for _ in 0..1000 {
                let x = Array1::from_shape_fn(10, |_| rng.gen_range(-5.0..5.0));
                let y = Array1::from_shape_fn(10, |_| rng.gen_range(-5.0..5.0));
                let d_out = op.apply(&x).unwrap() - op.apply(&y).unwrap();
                let d_in = &x - &y;
                assert!(
                    d_out.dot(&d_out).sqrt() <= (bound + 1e-12) * d_in.dot(&d_in).sqrt(),
                    "contraction violated"
                );
            }
        }
    }

    #[test]
    fn fixed_point_consistent_and_independent_of_inner_steps() {
        let tol = 1e-12;
        let op1 = elastic_net_op(1);
        let fp = op1.problem().reference_fixed_point(tol).unwrap();
        for m in [1, 3] {
            let op = elastic_net_op(m);
            let diff = op.apply(&fp.z).unwrap() - &fp.z;
            assert!(diff.dot(&diff).sqrt() <= 10.0 * tol);
        }
        // Optimality linkage: prox(z*) passes the subgradient test.
        assert!(op1.problem().optimality_residual(&fp.y).unwrap() <= 10.0 * tol);
    }

    #[test]
    fn overflow_surfaces_as_numeric_error() {
        let op = elastic_net_op(1);
        let huge = Array1::from_elem(10, f64::MAX);
        assert!(matches!(op.apply(&huge), Err(crate::error::Error::NonFinite { .. })));
    }

    #[test]
    fn reduces_to_gradient_step_when_g_zero() {
        let f = random_spd_quadratic(6, 1.0, 9.0, 0.3, 77).unwrap();
        let p = Problem::new(
            f,
            NonsmoothPart::Zero,
            BlockPartition::contiguous(6, 2).unwrap(),
            None,
        )
        .unwrap();
        let op = ProxGradientOperator::new(p.clone(), 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let x = Array1::from_shape_fn(6, |_| rng.gen_range(-2.0..2.0));
            let plain = &x - &(p.gamma() * &p.gradient(&x).unwrap());
            let applied = op.apply(&x).unwrap();
            for i in 0..6 {
                assert!((plain[i] - applied[i]).abs() <= 1e-14);
            }
        }
    }
}
