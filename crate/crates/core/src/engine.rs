//! Executes asynchronous iterations against a validated schedule, recording a
//! complete trace: which blocks were updated, which labels they consumed,
//! the full stale vector exchanged per iteration, and the new block values.
//!
//! A run is sequential and deterministic: identical inputs produce
//! bit-identical traces (fixed evaluation order, plain f64 arithmetic).
//! Distinct runs share no mutable state and may execute concurrently.

use ndarray::Array1;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::operators::ProxGradientOperator;
use crate::problem::BlockPartition;
use crate::schedule::{validate, Schedule};

/// How the exchanged values of an iteration are formed.
///
/// `Exact` reproduces the labelled iterate values. The two flexible policies
/// construct partial updates that satisfy the exchange norm constraint by
/// design: an interpolation keeps each block inside the hull of a stale value
/// and a freshly applied operator output, and an inner snapshot exposes the
/// state of the base iteration after `steps` of the operator's inner steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExchangePolicy {
    Exact,
    Interpolate { theta: f64 },
    InnerSnapshot { steps: usize },
}

impl ExchangePolicy {
    pub fn is_flexible(&self) -> bool {
        !matches!(self, ExchangePolicy::Exact)
    }

    fn check(&self, op: &ProxGradientOperator) -> Result<()> {
        match self {
            ExchangePolicy::Exact => Ok(()),
            ExchangePolicy::Interpolate { theta } => {
                if !(0.0..=1.0).contains(theta) {
                    return Err(Error::input("interpolation theta must lie in [0, 1]"));
                }
                Ok(())
            }
            ExchangePolicy::InnerSnapshot { steps } => {
                if *steps == 0 || *steps > op.inner_steps() {
                    return Err(Error::input(format!(
                        "snapshot steps must lie in 1..={}",
                        op.inner_steps()
                    )));
                }
                Ok(())
            }
        }
    }
}

/// One executed iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub j: usize,
    pub active: Vec<usize>,
    pub labels: Vec<usize>,
    /// The assembled stale vector consumed by the update, full length.
    pub exchanged: Array1<f64>,
    /// New values of the updated blocks, in block-coordinate order.
    pub updates: Vec<(usize, Vec<f64>)>,
}

/// Complete history of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub policy: ExchangePolicy,
    pub schedule: Schedule,
    pub blocks: BlockPartition,
    pub x0: Array1<f64>,
    pub records: Vec<IterationRecord>,
    pub final_iterate: Array1<f64>,
}

impl Trace {
    pub fn horizon(&self) -> usize {
        self.schedule.horizon
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn n_blocks(&self) -> usize {
        self.schedule.n_blocks
    }

    /// Reconstructs `x(j)` from the records: base case `x(0) = x0`, then
    /// updated blocks overwrite and untouched blocks carry over unchanged.
    pub fn iterate_at(&self, j: usize) -> Result<Array1<f64>> {
        if j > self.horizon() {
            return Err(Error::input(format!(
                "iteration {j} out of range 0..={}",
                self.horizon()
            )));
        }
        let mut x = self.x0.clone();
        for record in &self.records[..j] {
            for (block, values) in &record.updates {
                for (&c, &v) in self.blocks.coords(*block).iter().zip(values.iter()) {
                    x[c] = v;
                }
            }
        }
        Ok(x)
    }

    /// All iterates `x(0)..=x(horizon)`, reconstructed incrementally.
    pub fn iterates(&self) -> Vec<Array1<f64>> {
        let mut out = Vec::with_capacity(self.horizon() + 1);
        let mut x = self.x0.clone();
        out.push(x.clone());
        for record in &self.records {
            for (block, values) in &record.updates {
                for (&c, &v) in self.blocks.coords(*block).iter().zip(values.iter()) {
                    x[c] = v;
                }
            }
            out.push(x.clone());
        }
        out
    }

    /// CSV rows `(j, updated_mask, l_0.., residual)`; the residual column is a
    /// placeholder filled by downstream analysis, left empty here.
    pub fn to_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        if self.n_blocks() > 64 {
            return Err(Error::input("CSV bitmask export supports at most 64 blocks"));
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["j".to_string(), "updated_mask".to_string()];
        header.extend((0..self.n_blocks()).map(|i| format!("l_{i}")));
        header.push("residual".to_string());
        w.write_record(&header).map_err(|e| Error::input(e.to_string()))?;
        for record in &self.records {
            let mask: u64 = record.active.iter().fold(0, |m, &b| m | (1 << b));
            let mut row = vec![record.j.to_string(), mask.to_string()];
            row.extend(record.labels.iter().map(|l| l.to_string()));
            row.push(String::new());
            w.write_record(&row).map_err(|e| Error::input(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::input(e.to_string()))?;
        Ok(())
    }

    /// Sidecar payload of the exchanged values, one row per iteration.
    pub fn exchanged_json(&self) -> serde_json::Value {
        json!({
            "policy": self.policy,
            "exchanged": self.records.iter().map(|r| r.exchanged.to_vec()).collect::<Vec<_>>(),
        })
    }
}

/// Runs the asynchronous iteration defined by `(op, x0, schedule, policy)`.
///
/// The schedule must pass validation, block counts and dimensions must agree,
/// and a non-finite iterate aborts the run naming the offending iteration.
pub fn run(
    op: &ProxGradientOperator,
    x0: &Array1<f64>,
    schedule: &Schedule,
    policy: ExchangePolicy,
) -> Result<Trace> {
    let problem = op.problem();
    if schedule.n_blocks != problem.n_blocks() {
        return Err(Error::input(format!(
            "schedule has {} blocks, problem has {}",
            schedule.n_blocks,
            problem.n_blocks()
        )));
    }
    if x0.len() != problem.dim() {
        return Err(Error::input("x0 dimension mismatch"));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("x0 must be finite"));
    }
    policy.check(op)?;
    let report = validate(schedule);
    if !report.overall {
        return Err(Error::input(format!(
            "schedule failed validation: {}",
            report.failed_conditions().join(", ")
        )));
    }

    let blocks = problem.blocks().clone();
    let mut history: Vec<Array1<f64>> = Vec::with_capacity(schedule.horizon + 1);
    history.push(x0.clone());
    let mut records = Vec::with_capacity(schedule.horizon);

    for j in 1..=schedule.horizon {
        let event = schedule.event(j);
        // x(l(j)): per-block assembly from the labelled iterates.
        let mut stale = Array1::zeros(problem.dim());
        for (i, &label) in event.labels.iter().enumerate() {
            let source = &history[label];
            for &c in blocks.coords(i) {
                stale[c] = source[c];
            }
        }
        let exchanged = match policy {
            ExchangePolicy::Exact => stale,
            ExchangePolicy::Interpolate { theta } => {
                let fresh = op.apply_steps(&stale, op.inner_steps());
                let mut v = stale;
                for c in 0..v.len() {
                    v[c] = theta * v[c] + (1.0 - theta) * fresh[c];
                }
                v
            }
            ExchangePolicy::InnerSnapshot { steps } => op.apply_steps(&stale, steps),
        };
        if exchanged.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { iteration: j, context: "exchanged values".into() });
        }
        let image = op.apply_steps(&exchanged, op.inner_steps());
        let mut next = history[j - 1].clone();
        let mut updates = Vec::with_capacity(event.active.len());
        for &i in &event.active {
            let coords = blocks.coords(i);
            let mut values = Vec::with_capacity(coords.len());
            for &c in coords {
                let v = image[c];
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        iteration: j,
                        context: format!("update of block {i}"),
                    });
                }
                next[c] = v;
                values.push(v);
            }
            updates.push((i, values));
        }
        records.push(IterationRecord {
            j,
            active: event.active.clone(),
            labels: event.labels.clone(),
            exchanged,
            updates,
        });
        history.push(next);
    }

    Ok(Trace {
        policy,
        schedule: schedule.clone(),
        blocks,
        x0: x0.clone(),
        records,
        final_iterate: history.pop().expect("history nonempty"),
    })
}
