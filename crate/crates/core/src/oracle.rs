//! Independent reference implementations used to cross-check the main code
//! paths: deliberately naive, shared by the test suites and the CLI `oracle`
//! subcommand, and kept free of the implementation they check.

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::problem::{NonsmoothPart, Problem};
use crate::schedule::{DelayClass, Schedule, ScheduleEvent};

/// Central finite differences of the smooth part, step `h` per coordinate.
pub fn finite_difference_gradient(p: &Problem, x: &Array1<f64>, h: f64) -> Result<Array1<f64>> {
    if x.len() != p.dim() {
        return Err(Error::input("dimension mismatch"));
    }
    let mut grad = Array1::zeros(p.dim());
    for i in 0..p.dim() {
        let mut plus = x.clone();
        let mut minus = x.clone();
        plus[i] += h;
        minus[i] -= h;
        grad[i] = (p.smooth().value(&plus) - p.smooth().value(&minus)) / (2.0 * h);
    }
    Ok(grad)
}

/// One-dimensional grid argmin of `g(v) + (v - x)^2 / (2 gamma)`.
///
/// Box parts use their first coordinate's bounds. Pure grid scan: the result
/// is accurate to one `resolution` step.
pub fn prox_grid_1d(g: &NonsmoothPart, x: f64, gamma: f64, resolution: f64) -> f64 {
    let (lo, hi, penalty): (f64, f64, Box<dyn Fn(f64) -> f64>) = match g {
        NonsmoothPart::Zero => (x - 1.0, x + 1.0, Box::new(|_| 0.0)),
        NonsmoothPart::L1 { lambda } => {
            let lambda = *lambda;
            let reach = gamma * lambda + 1.0;
            (-x.abs() - reach, x.abs() + reach, Box::new(move |v: f64| lambda * v.abs()))
        }
        NonsmoothPart::Box { lo, hi } => (lo[0], hi[0], Box::new(|_| 0.0)),
    };
    let mut best_v = lo;
    let mut best = penalty(lo) + (lo - x) * (lo - x) / (2.0 * gamma);
    let steps = ((hi - lo) / resolution).ceil() as usize;
    for s in 1..=steps {
        let v = (lo + s as f64 * resolution).min(hi);
        let obj = penalty(v) + (v - x) * (v - x) / (2.0 * gamma);
        if obj < best {
            best = obj;
            best_v = v;
        }
    }
    best_v
}

/// Event-ordering reference for the two-processor schedule: materializes both
/// completion streams as `(time, processor)` pairs, sorts them (processor 0
/// wins ties), and labels every event with the latest completion of each
/// block strictly before it.
pub fn baudet_schedule_by_sorting(horizon: usize) -> Schedule {
    let mut completions: Vec<(usize, usize)> = Vec::new();
    // More than enough block-0 completions to fill the horizon.
    for t in 1..=horizon {
        completions.push((t, 0));
    }
    let mut k = 1usize;
    let mut t = 1usize;
    while t <= horizon {
        completions.push((t, 1));
        k += 1;
        t += k;
    }
    completions.sort_by_key(|&(time, proc)| (time, proc));
    completions.truncate(horizon);

    let mut events = Vec::with_capacity(horizon);
    let mut last = [0usize; 2];
    for (idx, &(_, proc)) in completions.iter().enumerate() {
        events.push(ScheduleEvent { active: vec![proc], labels: vec![last[0], last[1]] });
        last[proc] = idx + 1;
    }
    Schedule {
        n_blocks: 2,
        horizon,
        delay_class: DelayClass::UnboundedAdmissible,
        seed: 0,
        events,
    }
}

/// Literal evaluation of the macro-iteration definition: `j_{k+1}` is the
/// smallest `j` such that the union of `S_r` over `r <= j` with
/// `l(r) >= j_k` covers every block. Recomputed from scratch for each
/// candidate, no incremental state.
pub fn macro_iterations_brute_force(s: &Schedule) -> Vec<usize> {
    let mut indices = vec![0usize];
    loop {
        let j_k = *indices.last().unwrap();
        let mut next = None;
        'candidates: for j in (j_k + 1)..=s.horizon {
            let mut covered = vec![false; s.n_blocks];
            for r in 1..=j {
                let ev = s.event(r);
                let l_r = *ev.labels.iter().min().unwrap();
                if l_r >= j_k {
                    for &b in &ev.active {
                        covered[b] = true;
                    }
                }
            }
            if covered.iter().all(|&c| c) {
                next = Some(j);
                break 'candidates;
            }
        }
        match next {
            Some(j) => indices.push(j),
            None => break,
        }
    }
    indices
}

/// Arbitrary schedule satisfying only condition a) and nonempty steering,
/// for stress-testing the macro-iteration tracker against the brute force.
pub fn random_raw_schedule(n_blocks: usize, horizon: usize, seed: u64) -> Schedule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut events = Vec::with_capacity(horizon);
    for j in 1..=horizon {
        let mut active: Vec<usize> = (0..n_blocks).filter(|_| rng.gen_bool(0.4)).collect();
        if active.is_empty() {
            active.push(rng.gen_range(0..n_blocks));
        }
        let labels: Vec<usize> = (0..n_blocks).map(|_| rng.gen_range(0..j)).collect();
        events.push(ScheduleEvent { active, labels });
    }
    Schedule {
        n_blocks,
        horizon,
        delay_class: DelayClass::OutOfOrder,
        seed,
        events,
    }
}
