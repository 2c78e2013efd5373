//! Structural sequences (macro-iterations, epochs) extracted from traces and
//! the verifiers for the exchange norm constraint, the freshness property,
//! and the macro-iteration rate bound.
//!
//! All residuals are measured against the operator fixed point `z*` (the
//! iterates converge to `z*`, not to `prox(z*)` when `g != 0`) in the
//! weighted block-max norm `||v||_u = max_i ||v_i|| / u_i` with Euclidean
//! block norms and unit weights by default.

use ndarray::Array1;
use serde::Serialize;

use crate::engine::Trace;
use crate::error::{Error, Result};
use crate::problem::BlockPartition;
use crate::schedule::Schedule;

/// Absolute slack tolerance for the exchange norm constraint.
pub const NORM_CONSTRAINT_TOL: f64 = 1e-12;
/// Absolute slack tolerance for the rate bound.
pub const RATE_BOUND_TOL: f64 = 1e-9;

/// Positive per-block weights defining the weighted block-max norm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockNorm {
    weights: Vec<f64>,
}

impl BlockNorm {
    pub fn ones(n_blocks: usize) -> Self {
        BlockNorm { weights: vec![1.0; n_blocks] }
    }

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::input("block norm weights must all be positive"));
        }
        Ok(BlockNorm { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `max_i ||v_i|| / u_i`.
    pub fn umax(&self, blocks: &BlockPartition, v: &Array1<f64>) -> f64 {
        (0..blocks.count())
            .map(|i| blocks.block_norm(v, i) / self.weights[i])
            .fold(0.0_f64, f64::max)
    }
}

// ---------------------------------------------------------------------------
// Macro-iterations and epochs
// ---------------------------------------------------------------------------

/// The macro-iteration boundaries `j_0 = 0 < j_1 < ...` of a run: `j_{k+1}`
/// is the first iteration by which every block has been updated using values
/// labelled at or after `j_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacroIterations {
    /// Strictly increasing, starts with `j_0 = 0`.
    pub indices: Vec<usize>,
    /// False when the horizon ended mid-macro-iteration.
    pub complete: bool,
}

impl MacroIterations {
    /// Number of closed macro-iterations.
    pub fn closed(&self) -> usize {
        self.indices.len() - 1
    }

    /// Largest `k` with `j_k <= j`.
    pub fn index_at(&self, j: usize) -> usize {
        self.indices.partition_point(|&jk| jk <= j) - 1
    }
}

/// Epoch boundaries `k_0 = 0 < k_1 < ...`: each machine performs at least two
/// updates per interval `(k_m, k_{m+1}]` (left-exclusive, right-inclusive).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Epochs {
    pub indices: Vec<usize>,
    /// Machine owning each block.
    pub owner_map: Vec<usize>,
}

impl Epochs {
    pub fn closed(&self) -> usize {
        self.indices.len() - 1
    }
}

/// Incremental one-pass macro-iteration tracker; equals the brute-force
/// evaluation of the definition (events before the latest boundary can never
/// qualify for the next one, since labels point strictly into the past).
pub fn macro_iterations_of(schedule: &Schedule) -> MacroIterations {
    let mut indices = vec![0usize];
    let mut covered = vec![false; schedule.n_blocks];
    let mut missing = schedule.n_blocks;
    for j in 1..=schedule.horizon {
        let event = schedule.event(j);
        let min_label = *event.labels.iter().min().expect("labels nonempty");
        if min_label >= *indices.last().unwrap() {
            for &b in &event.active {
                if !covered[b] {
                    covered[b] = true;
                    missing -= 1;
                }
            }
            if missing == 0 {
                indices.push(j);
                covered.iter_mut().for_each(|c| *c = false);
                missing = schedule.n_blocks;
            }
        }
    }
    let complete = *indices.last().unwrap() == schedule.horizon;
    MacroIterations { indices, complete }
}

pub fn macro_iterations(trace: &Trace) -> MacroIterations {
    macro_iterations_of(&trace.schedule)
}

/// Epoch extraction; an update counts for machine `w` at iteration `j` when
/// some block owned by `w` is in `S_j`.
pub fn epochs_of(schedule: &Schedule, owner_map: &[usize]) -> Result<Epochs> {
    if owner_map.len() != schedule.n_blocks {
        return Err(Error::input(format!(
            "owner map covers {} blocks, schedule has {}",
            owner_map.len(),
            schedule.n_blocks
        )));
    }
    let machines: Vec<usize> = {
        let mut m = owner_map.to_vec();
        m.sort_unstable();
        m.dedup();
        m
    };
    let mut counts: Vec<usize> = vec![0; machines.len()];
    let machine_slot = |w: usize| machines.binary_search(&w).expect("machine known");
    let mut indices = vec![0usize];
    for j in 1..=schedule.horizon {
        let event = schedule.event(j);
        let mut touched: Vec<usize> = event.active.iter().map(|&b| owner_map[b]).collect();
        touched.sort_unstable();
        touched.dedup();
        for w in touched {
            counts[machine_slot(w)] += 1;
        }
        if counts.iter().all(|&c| c >= 2) {
            indices.push(j);
            counts.iter_mut().for_each(|c| *c = 0);
        }
    }
    Ok(Epochs { indices, owner_map: owner_map.to_vec() })
}

pub fn epochs(trace: &Trace, owner_map: &[usize]) -> Result<Epochs> {
    epochs_of(&trace.schedule, owner_map)
}

// ---------------------------------------------------------------------------
// Verification reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub j: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

/// Outcome of an inequality sweep: everything checked, every violation, and
/// the worst slack `lhs - rhs` seen (negative when all inequalities hold with
/// margin).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checked: usize,
    pub violations: Vec<Violation>,
    pub worst_slack: f64,
    pub pass: bool,
}

impl VerificationReport {
    fn from_checks(checked: usize, violations: Vec<Violation>, worst_slack: f64) -> Self {
        let pass = violations.is_empty();
        VerificationReport { checked, violations, worst_slack, pass }
    }
}

// ---------------------------------------------------------------------------
// Freshness
// ---------------------------------------------------------------------------

/// Checks the freshness property: every update at `j >= j_{k+1}` consumes
/// labels at or after `j_k`. Holds whenever the min-label sequence is
/// monotone; out-of-order schedules can break it, which the report records.
pub fn check_freshness(trace: &Trace, ms: &MacroIterations) -> VerificationReport {
    check_freshness_of(&trace.schedule, ms)
}

pub fn check_freshness_of(schedule: &Schedule, ms: &MacroIterations) -> VerificationReport {
    let mut violations = Vec::new();
    let mut checked = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for j in 1..=schedule.horizon {
        let p = ms.index_at(j);
        if p == 0 {
            continue; // before j_1 the property is vacuous
        }
        let required = ms.indices[p - 1];
        for (i, &label) in schedule.event(j).labels.iter().enumerate() {
            checked += 1;
            let slack = required as f64 - label as f64;
            worst = worst.max(slack);
            if label < required {
                violations.push(Violation {
                    j,
                    block: Some(i),
                    lhs: required as f64,
                    rhs: label as f64,
                });
            }
        }
    }
    if checked == 0 {
        worst = 0.0;
    }
    // For this check "slack" is required - label, positive on violation.
    VerificationReport::from_checks(checked, violations, worst)
}

/// Searches epoch intervals `(k_{m-1}, k_m]` for updates whose min-label
/// falls before `k_{m-1}` — the structural situation macro-iterations
/// tolerate (they re-anchor on labels) but epoch counting does not see.
pub fn epoch_label_violations(schedule: &Schedule, epochs: &Epochs) -> Vec<Violation> {
    let mut out = Vec::new();
    for w in 1..epochs.indices.len() {
        let lo = epochs.indices[w - 1];
        let hi = epochs.indices[w];
        for j in (lo + 1)..=hi {
            let l = schedule.min_label(j);
            if l < lo {
                out.push(Violation { j, block: None, lhs: lo as f64, rhs: l as f64 });
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Exchange norm constraint
// ---------------------------------------------------------------------------

/// Verifies every exchanged value against the norm constraint
/// `||xtilde_i(j) - z*_i|| / u_i <= ||x(l(j)) - z*||_u` with absolute slack
/// [`NORM_CONSTRAINT_TOL`].
pub fn verify_norm_constraint(
    trace: &Trace,
    z_star: &Array1<f64>,
    norm: &BlockNorm,
) -> Result<VerificationReport> {
    if z_star.len() != trace.dim() {
        return Err(Error::input("z* dimension mismatch"));
    }
    if norm.weights.len() != trace.n_blocks() {
        return Err(Error::input("block norm weight count mismatch"));
    }
    if trace.records.len() != trace.horizon() {
        return Err(Error::input("trace is missing exchanged values"));
    }
    let iterates = trace.iterates();
    let blocks = &trace.blocks;
    let mut violations = Vec::new();
    let mut checked = 0usize;
    let mut worst = f64::NEG_INFINITY;
    let mut stale = Array1::zeros(trace.dim());
    for record in &trace.records {
        for (i, &label) in record.labels.iter().enumerate() {
            let source = &iterates[label];
            for &c in blocks.coords(i) {
                stale[c] = source[c];
            }
        }
        let diff_labelled = &stale - z_star;
        let rhs = norm.umax(blocks, &diff_labelled);
        let diff_exchanged = &record.exchanged - z_star;
        for i in 0..blocks.count() {
            let lhs = blocks.block_norm(&diff_exchanged, i) / norm.weights[i];
            let slack = lhs - rhs;
            checked += 1;
            worst = worst.max(slack);
            if slack > NORM_CONSTRAINT_TOL {
                violations.push(Violation { j: record.j, block: Some(i), lhs, rhs });
            }
        }
    }
    if checked == 0 {
        worst = 0.0;
    }
    Ok(VerificationReport::from_checks(checked, violations, worst))
}

// ---------------------------------------------------------------------------
// Rate bound
// ---------------------------------------------------------------------------

/// Rate-bound verification output: the inequality sweep plus the empirical
/// per-macro-iteration contraction of the squared block-max residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateBoundReport {
    pub report: VerificationReport,
    /// Ratio of squared residuals at consecutive macro-iteration boundaries.
    pub contraction_series: Vec<f64>,
}

/// Checks `max_i ||x_i(j) - z*_i||^2 <= (1 - rho)^k max_i ||x_i(0) - z*_i||^2`
/// for every iteration, with `k` the macro-iteration index at `j` and
/// absolute slack [`RATE_BOUND_TOL`].
pub fn verify_rate_bound(
    trace: &Trace,
    z_star: &Array1<f64>,
    ms: &MacroIterations,
    rho: f64,
) -> Result<RateBoundReport> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::input("rho must lie in (0, 1]"));
    }
    if z_star.len() != trace.dim() {
        return Err(Error::input("z* dimension mismatch"));
    }
    if !ms.complete && ms.closed() < 2 {
        return Err(Error::InsufficientData(format!(
            "only {} closed macro-iterations in an incomplete trace",
            ms.closed()
        )));
    }
    let blocks = &trace.blocks;
    let iterates = trace.iterates();
    let sq_residual = |x: &Array1<f64>| -> f64 {
        let diff = x - z_star;
        (0..blocks.count())
            .map(|i| {
                let n = blocks.block_norm(&diff, i);
                n * n
            })
            .fold(0.0_f64, f64::max)
    };
    let r0 = sq_residual(&iterates[0]);
    let mut violations = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for (j, x) in iterates.iter().enumerate() {
        let k = ms.index_at(j);
        let rhs = (1.0 - rho).powi(k as i32) * r0;
        let lhs = sq_residual(x);
        let slack = lhs - rhs;
        worst = worst.max(slack);
        if slack > RATE_BOUND_TOL {
            violations.push(Violation { j, block: None, lhs, rhs });
        }
    }
    let contraction_series = ms
        .indices
        .windows(2)
        .map(|w| {
            let prev = sq_residual(&iterates[w[0]]);
            let cur = sq_residual(&iterates[w[1]]);
            if prev == 0.0 {
                0.0
            } else {
                cur / prev
            }
        })
        .collect();
    Ok(RateBoundReport {
        report: VerificationReport::from_checks(iterates.len(), violations, worst),
        contraction_series,
    })
}

// ---------------------------------------------------------------------------
// Residual series and stopping index
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualPoint {
    pub j: usize,
    /// Weighted block-max residual `||x(j) - z*||_u`.
    pub umax: f64,
    /// Plain Euclidean residual.
    pub l2: f64,
}

/// Residuals per iteration. Not monotone in general: asynchronous residuals
/// may rise between macro-iterations.
pub fn residual_series(trace: &Trace, z_star: &Array1<f64>, norm: &BlockNorm) -> Vec<ResidualPoint> {
    trace
        .iterates()
        .iter()
        .enumerate()
        .map(|(j, x)| {
            let diff = x - z_star;
            ResidualPoint {
                j,
                umax: norm.umax(&trace.blocks, &diff),
                l2: diff.dot(&diff).sqrt(),
            }
        })
        .collect()
}

/// Writes the residual series as CSV with columns
/// `j,k,residual_umax,residual_l2,bound_rhs,macro_boundary_flag`.
pub fn residual_csv<W: std::io::Write>(
    trace: &Trace,
    z_star: &Array1<f64>,
    norm: &BlockNorm,
    ms: &MacroIterations,
    rho: f64,
    out: W,
) -> Result<()> {
    let series = residual_series(trace, z_star, norm);
    let blocks = &trace.blocks;
    let diff0 = &trace.x0 - z_star;
    let r0 = (0..blocks.count())
        .map(|i| {
            let n = blocks.block_norm(&diff0, i);
            n * n
        })
        .fold(0.0_f64, f64::max);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["j", "k", "residual_umax", "residual_l2", "bound_rhs", "macro_boundary_flag"])
        .map_err(|e| Error::input(e.to_string()))?;
    for point in &series {
        let k = ms.index_at(point.j);
        let bound = (1.0 - rho).powi(k as i32) * r0;
        let boundary = ms.indices.binary_search(&point.j).is_ok();
        w.write_record([
            point.j.to_string(),
            k.to_string(),
            format!("{:e}", point.umax),
            format!("{:e}", point.l2),
            format!("{bound:e}"),
            u8::from(boundary).to_string(),
        ])
        .map_err(|e| Error::input(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::input(e.to_string()))?;
    Ok(())
}

/// Smallest `k` with `(1 - rho)^k * r0 <= tol^2`.
pub fn stopping_index(r0: f64, rho: f64, tol: f64) -> Result<usize> {
    if !(r0 > 0.0) || !(tol > 0.0) {
        return Err(Error::input("r0 and tol must be positive"));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::input("rho must lie in (0, 1]"));
    }
    let target = tol * tol;
    if r0 <= target {
        return Ok(0);
    }
    if rho == 1.0 {
        return Ok(1);
    }
    let factor = 1.0 - rho;
    let mut k = ((target / r0).ln() / factor.ln()).ceil().max(1.0) as usize;
    while factor.powi(k as i32) * r0 > target {
        k += 1;
    }
    while k > 1 && factor.powi(k as i32 - 1) * r0 <= target {
        k -= 1;
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run, ExchangePolicy};
    use crate::operators::ProxGradientOperator;
    use crate::oracle;
    use crate::problem::{diag_quadratic, random_spd_quadratic, NonsmoothPart, Problem};
    use crate::schedule::{generate, DelayClass, Schedule, ScheduleEvent, ScheduleKind};
    use ndarray::array;

    fn schedule_from(n_blocks: usize, events: Vec<(Vec<usize>, Vec<usize>)>) -> Schedule {
        let horizon = events.len();
        Schedule {
            n_blocks,
            horizon,
            delay_class: DelayClass::OutOfOrder,
            seed: 0,
            events: events
                .into_iter()
                .map(|(active, labels)| ScheduleEvent { active, labels })
                .collect(),
        }
    }

    #[test]
    fn macro_iterations_hand_example() {
        // Updates alternate blocks with labels pinned at the previous boundary.
        let s = schedule_from(
            2,
            vec![
                (vec![0], vec![0, 0]),
                (vec![1], vec![0, 0]),
                (vec![0], vec![2, 2]),
                (vec![1], vec![2, 2]),
            ],
        );
        let ms = macro_iterations_of(&s);
        assert_eq!(ms.indices, vec![0, 2, 4]);
        assert!(ms.complete);
        assert_eq!(oracle::macro_iterations_brute_force(&s), vec![0, 2, 4]);
    }

    #[test]
    fn synchronous_macro_iterations_close_every_step() {
        let s = generate(ScheduleKind::Synchronous, 4, 12, 0).unwrap();
        let ms = macro_iterations_of(&s);
        assert_eq!(ms.indices, (0..=12).collect::<Vec<_>>());
    }

    #[test]
    fn tracker_matches_brute_force_on_random_schedules() {
        for seed in 0..200 {
            let n = 1 + (seed as usize % 4);
            let horizon = 10 + (seed as usize * 7) % 51;
            let s = oracle::random_raw_schedule(n, horizon, seed);
            let ms = macro_iterations_of(&s);
            assert_eq!(ms.indices, oracle::macro_iterations_brute_force(&s), "seed {seed}");
        }
    }

    #[test]
    fn epochs_hand_examples() {
        // One machine per block, alternating updates: k_1 = 4.
        let s = schedule_from(
            2,
            vec![
                (vec![0], vec![0, 0]),
                (vec![1], vec![0, 0]),
                (vec![0], vec![1, 1]),
                (vec![1], vec![2, 2]),
            ],
        );
        let es = epochs_of(&s, &[0, 1]).unwrap();
        assert_eq!(es.indices, vec![0, 4]);

        // Synchronous: every machine updates once per iteration, two needed.
        let sync = generate(ScheduleKind::Synchronous, 3, 10, 0).unwrap();
        let es = epochs_of(&sync, &[0, 1, 2]).unwrap();
        assert_eq!(es.indices, vec![0, 2, 4, 6, 8, 10]);

        // Single machine owning all blocks: second event closes the epoch.
        let es = epochs_of(&s, &[7, 7]).unwrap();
        assert_eq!(es.indices[1], 2);
    }

    #[test]
    fn freshness_passes_on_synchronous_and_monotone_schedules() {
        let sync = generate(ScheduleKind::Synchronous, 3, 20, 0).unwrap();
        let ms = macro_iterations_of(&sync);
        assert!(check_freshness_of(&sync, &ms).pass);

        for seed in 0..50 {
            let s = generate(ScheduleKind::Bounded { b: 5 }, 3, 120, seed).unwrap();
            let ms = macro_iterations_of(&s);
            let report = check_freshness_of(&s, &ms);
            assert!(report.pass, "seed {seed}: {:?}", report.violations.first());
        }
    }

    #[test]
    fn freshness_violations_appear_for_out_of_order_schedules() {
        let mut found = false;
        for seed in 0..50 {
            let s = generate(ScheduleKind::OutOfOrder { reorder_rate: 0.5 }, 3, 120, seed).unwrap();
            let ms = macro_iterations_of(&s);
            if !check_freshness_of(&s, &ms).pass {
                found = true;
                break;
            }
        }
        assert!(found, "no out-of-order seed violated freshness");
    }

    #[test]
    fn norm_constraint_passes_exact_and_flags_tampering() {
        let p = Problem::new(
            random_spd_quadratic(6, 1.0, 10.0, 0.3, 3).unwrap(),
            NonsmoothPart::l1(0.1).unwrap(),
            crate::problem::BlockPartition::contiguous(6, 3).unwrap(),
            None,
        )
        .unwrap();
        let op = ProxGradientOperator::new(p.clone(), 1).unwrap();
        let fp = p.reference_fixed_point(1e-12).unwrap();
        let schedule = generate(ScheduleKind::Bounded { b: 4 }, 3, 60, 4).unwrap();
        let x0 = Array1::from_elem(6, 2.0);
        let mut trace = run(&op, &x0, &schedule, ExchangePolicy::Exact).unwrap();
        let norm = BlockNorm::ones(3);
        let report = verify_norm_constraint(&trace, &fp.z, &norm).unwrap();
        assert!(report.pass, "worst slack {}", report.worst_slack);
        assert_eq!(report.checked, 60 * 3);

        // Push one exchanged block away from z* by twice the worst radius any
        // labelled vector can reach (the initial residual).
        let r0 = norm.umax(&trace.blocks, &(&x0 - &fp.z));
        for &c in trace.blocks.coords(1) {
            trace.records[30].exchanged[c] = fp.z[c] + 2.0 * (1.0 + r0);
        }
        let tampered = verify_norm_constraint(&trace, &fp.z, &norm).unwrap();
        assert!(!tampered.pass);
        assert_eq!(tampered.violations[0].j, 31);
        assert_eq!(tampered.violations[0].block, Some(1));
    }

    #[test]
    fn norm_constraint_requires_complete_exchange_records() {
        let p = Problem::new(
            diag_quadratic(&[1.0, 2.0], &[0.0, 0.0]).unwrap(),
            NonsmoothPart::Zero,
            crate::problem::BlockPartition::singletons(2).unwrap(),
            None,
        )
        .unwrap();
        let op = ProxGradientOperator::new(p, 1).unwrap();
        let schedule = generate(ScheduleKind::Synchronous, 2, 10, 0).unwrap();
        let mut trace = run(&op, &array![1.0, 1.0], &schedule, ExchangePolicy::Exact).unwrap();
        trace.records.truncate(5);
        assert!(matches!(
            verify_norm_constraint(&trace, &array![0.0, 0.0], &BlockNorm::ones(2)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn rate_bound_trivial_one_dimensional_case() {
        let p = Problem::new(
            diag_quadratic(&[1.0], &[0.0]).unwrap(),
            NonsmoothPart::Zero,
            crate::problem::BlockPartition::singletons(1).unwrap(),
            Some(1.0),
        )
        .unwrap();
        let op = ProxGradientOperator::new(p.clone(), 1).unwrap();
        let schedule = generate(ScheduleKind::Synchronous, 1, 20, 0).unwrap();
        let trace = run(&op, &array![5.0], &schedule, ExchangePolicy::Exact).unwrap();
        let ms = macro_iterations(&trace);
        let fp = p.reference_fixed_point(1e-12).unwrap();
        let out = verify_rate_bound(&trace, &fp.z, &ms, p.rho()).unwrap();
        assert!(out.report.pass);
        // rho = 1: the bound is exactly 0 from the first macro-iteration on.
        assert_eq!(out.report.worst_slack, 0.0);
    }

    #[test]
    fn rate_bound_synchronous_quadratic() {
        let p = Problem::new(
            diag_quadratic(&[1.0, 3.0], &[0.5, -0.25]).unwrap(),
            NonsmoothPart::Zero,
            crate::problem::BlockPartition::singletons(2).unwrap(),
            Some(0.5),
        )
        .unwrap();
        let op = ProxGradientOperator::new(p.clone(), 1).unwrap();
        let schedule = generate(ScheduleKind::Synchronous, 2, 40, 0).unwrap();
        let x0 = array![4.0, -3.0];
        let trace = run(&op, &x0, &schedule, ExchangePolicy::Exact).unwrap();
        let ms = macro_iterations(&trace);
        let fp = p.reference_fixed_point(1e-12).unwrap();
        let out = verify_rate_bound(&trace, &fp.z, &ms, p.rho()).unwrap();
        assert!(out.report.pass, "worst slack {}", out.report.worst_slack);
        for ratio in &out.contraction_series {
            assert!(*ratio <= 0.5 + 1e-9);
        }
    }

    #[test]
    fn rate_bound_requires_enough_macro_iterations() {
        let p = Problem::new(
            diag_quadratic(&[1.0, 3.0], &[0.0, 0.0]).unwrap(),
            NonsmoothPart::Zero,
            crate::problem::BlockPartition::singletons(2).unwrap(),
            None,
        )
        .unwrap();
        let op = ProxGradientOperator::new(p.clone(), 1).unwrap();
        // Block 1 consumes only label 0, so no macro-iteration ever closes.
        let s = schedule_from(
            2,
            vec![
                (vec![0], vec![0, 0]),
                (vec![0], vec![1, 0]),
                (vec![0], vec![2, 0]),
            ],
        );
        let trace = run(&op, &array![1.0, 1.0], &s, ExchangePolicy::Exact).unwrap();
        let ms = macro_iterations(&trace);
        assert!(!ms.complete);
        let fp = p.reference_fixed_point(1e-12).unwrap();
        assert!(matches!(
            verify_rate_bound(&trace, &fp.z, &ms, p.rho()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn residual_series_boundary_cases() {
        let p = Problem::new(
            diag_quadratic(&[1.0], &[0.0]).unwrap(),
            NonsmoothPart::Zero,
            crate::problem::BlockPartition::singletons(1).unwrap(),
            Some(1.0),
        )
        .unwrap();
        let op = ProxGradientOperator::new(p, 1).unwrap();
        let schedule = generate(ScheduleKind::Synchronous, 1, 5, 0).unwrap();
        let trace = run(&op, &array![3.0], &schedule, ExchangePolicy::Exact).unwrap();
        let norm = BlockNorm::ones(1);
        let series = residual_series(&trace, &array![0.0], &norm);
        assert_eq!(series[0].umax, 3.0);
        assert!(series.last().unwrap().umax <= series[0].umax);

        // z* equal to a stationary x0 gives an all-zero series.
        let fixed = run(
            &ProxGradientOperator::new(
                Problem::new(
                    diag_quadratic(&[1.0], &[0.0]).unwrap(),
                    NonsmoothPart::Zero,
                    crate::problem::BlockPartition::singletons(1).unwrap(),
                    Some(1.0),
                )
                .unwrap(),
                1,
            )
            .unwrap(),
            &array![0.0],
            &schedule,
            ExchangePolicy::Exact,
        )
        .unwrap();
        for point in residual_series(&fixed, &array![0.0], &norm) {
            assert_eq!(point.umax, 0.0);
        }
    }

    #[test]
    fn stopping_index_examples() {
        let tol = 0.1_f64.sqrt(); // tol^2 = 0.1
        assert_eq!(stopping_index(1.0, 0.5, tol).unwrap(), 4);
        assert_eq!(stopping_index(1.0, 1.0, (1e-9_f64).sqrt()).unwrap(), 1);
        assert_eq!(stopping_index(0.05, 0.5, tol).unwrap(), 0);
        assert!(stopping_index(1.0, 1.5, tol).is_err());
        assert!(stopping_index(1.0, 0.0, tol).is_err());
    }

    #[test]
    fn out_of_order_epoch_violation_witness_exists() {
        let mut found = false;
        for seed in 0..50 {
            let s = generate(ScheduleKind::OutOfOrder { reorder_rate: 0.4 }, 3, 200, seed).unwrap();
            let es = epochs_of(&s, &[0, 1, 2]).unwrap();
            if !epoch_label_violations(&s, &es).is_empty() {
                found = true;
                break;
            }
        }
        assert!(found);
    }
}
