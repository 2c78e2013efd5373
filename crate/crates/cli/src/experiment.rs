//! One experiment run: for every seed, generate and validate a schedule, run
//! the engine, extract macro-iterations and epochs, apply the enabled
//! verifiers, and write per-seed CSV/JSON artifacts plus a single
//! `summary.json`. Re-running an identical config reproduces byte-identical
//! CSV bodies.

use std::fs;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use asynciter::analysis::{self, BlockNorm, MacroIterations, VerificationReport, Violation};
use asynciter::batch;
use asynciter::engine::{self, ExchangePolicy};
use asynciter::operators::ProxGradientOperator;
use asynciter::problem::FixedPoint;
use asynciter::schedule::{self};
use serde::Serialize;

use crate::config::ExperimentConfig;

pub const THREADS_ENV: &str = "ASYNCITER_THREADS";

#[derive(Debug, Serialize)]
pub struct Summary {
    pub tool_version: String,
    pub problem: ProblemInfo,
    pub policy: ExchangePolicy,
    pub reference: ReferenceInfo,
    pub seeds: Vec<SeedSummary>,
    pub overall_pass: bool,
}

#[derive(Debug, Serialize)]
pub struct ProblemInfo {
    pub dim: usize,
    pub n_blocks: usize,
    pub mu: f64,
    pub lipschitz: f64,
    pub gamma: f64,
    pub rho: f64,
    pub inner_steps: usize,
}

#[derive(Debug, Serialize)]
pub struct ReferenceInfo {
    pub tol: f64,
    pub residual: f64,
    pub optimality: f64,
    pub iterations: usize,
}

#[derive(Debug, Serialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub schedule_kind: String,
    pub horizon: usize,
    pub validation: ValidationSummary,
    pub macro_iterations: usize,
    pub macro_complete: bool,
    pub epochs: usize,
    pub verifications: Verifications,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_residual_umax: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct ValidationSummary {
    pub overall: bool,
    pub failed: Vec<String>,
}

#[derive(Debug, Default, Serialize)]
pub struct Verifications {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub freshness: Option<VerifierOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_constraint: Option<VerifierOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_bound: Option<VerifierOutcome>,
}

#[derive(Debug, Serialize)]
pub struct VerifierOutcome {
    pub pass: bool,
    pub checked: usize,
    pub violation_count: usize,
    pub worst_slack: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<Violation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl From<&VerificationReport> for VerifierOutcome {
    fn from(report: &VerificationReport) -> Self {
        VerifierOutcome {
            pass: report.pass,
            checked: report.checked,
            violation_count: report.violations.len(),
            worst_slack: report.worst_slack,
            first_violation: report.violations.first().cloned(),
            note: None,
        }
    }
}

impl VerifierOutcome {
    fn failed_with_note(note: String) -> Self {
        VerifierOutcome {
            pass: false,
            checked: 0,
            violation_count: 0,
            worst_slack: f64::INFINITY,
            first_violation: None,
            note: Some(note),
        }
    }

    fn pass(&self) -> bool {
        self.pass
    }
}

/// Worker threads for the per-seed pipelines; defaults to 1 so output
/// ordering never depends on wall-clock scheduling, 0 means all cores.
fn thread_cap() -> Result<usize, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(1),
        Ok(raw) => raw
            .trim()
            .parse::<usize>()
            .map_err(|_| format!("environment variable {THREADS_ENV} must be an integer, got {raw:?}")),
    }
}

pub fn run_experiment(config: &ExperimentConfig, quiet: bool) -> Result<Summary, String> {
    let threads = thread_cap()?;
    let problem = config.build_problem()?;
    let op = ProxGradientOperator::new(problem.clone(), config.operator.inner_steps)
        .map_err(|e| format!("field `operator.inner_steps`: {e}"))?;
    let reference = problem
        .reference_fixed_point(config.reference_tol)
        .map_err(|e| format!("reference solve failed: {e}"))?;
    fs::create_dir_all(&config.output_dir)
        .map_err(|e| format!("cannot create output dir {}: {e}", config.output_dir.display()))?;

    let seeds = config.schedule.seeds.clone();
    let outcomes: Vec<Result<SeedSummary, String>> = batch::map(&seeds, threads, |&seed| {
        run_seed(config, &op, &reference, seed)
    });

    let mut summaries = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        summaries.push(outcome?);
    }
    let overall_pass = summaries.iter().all(|s| s.pass);
    if !quiet {
        for s in &summaries {
            let status = if s.pass { "PASS" } else { "FAIL" };
            println!(
                "seed {s_seed}: {status} (schedule={kind}, macro={mc}, epochs={ep})",
                s_seed = s.seed,
                kind = s.schedule_kind,
                mc = s.macro_iterations,
                ep = s.epochs,
            );
        }
    }
    let summary = Summary {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        problem: ProblemInfo {
            dim: problem.dim(),
            n_blocks: problem.n_blocks(),
            mu: problem.mu(),
            lipschitz: problem.lipschitz(),
            gamma: problem.gamma(),
            rho: problem.rho(),
            inner_steps: op.inner_steps(),
        },
        policy: config.policy,
        reference: ReferenceInfo {
            tol: config.reference_tol,
            residual: reference.residual,
            optimality: reference.optimality,
            iterations: reference.iterations,
        },
        seeds: summaries,
        overall_pass,
    };
    let path = config.output_dir.join("summary.json");
    let text = serde_json::to_string_pretty(&summary)
        .map_err(|e| format!("cannot encode summary: {e}"))?;
    fs::write(&path, text + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(summary)
}

fn run_seed(
    config: &ExperimentConfig,
    op: &ProxGradientOperator,
    reference: &FixedPoint,
    seed: u64,
) -> Result<SeedSummary, String> {
    let problem = op.problem();
    let schedule = config.build_schedule(problem.n_blocks(), seed)?;
    let report = schedule::validate(&schedule);
    let validation = ValidationSummary {
        overall: report.overall,
        failed: report.failed_conditions().iter().map(|s| s.to_string()).collect(),
    };
    if config.verify.schedule && !report.overall {
        return Ok(SeedSummary {
            seed,
            schedule_kind: config.schedule.kind.name().to_string(),
            horizon: schedule.horizon,
            validation,
            macro_iterations: 0,
            macro_complete: false,
            epochs: 0,
            verifications: Verifications::default(),
            final_residual_umax: None,
            pass: false,
        });
    }

    let x0 = config.build_x0(problem.dim(), seed)?;
    let trace = engine::run(op, &x0, &schedule, config.policy)
        .map_err(|e| format!("seed {seed}: {e}"))?;
    let ms = analysis::macro_iterations(&trace);
    let owner_map: Vec<usize> = (0..problem.n_blocks()).collect();
    let epochs = analysis::epochs(&trace, &owner_map).map_err(|e| e.to_string())?;
    let norm = BlockNorm::ones(problem.n_blocks());

    let mut verifications = Verifications::default();
    if config.verify.freshness {
        verifications.freshness = Some((&analysis::check_freshness(&trace, &ms)).into());
    }
    if config.verify.norm_constraint {
        let report = analysis::verify_norm_constraint(&trace, &reference.z, &norm)
            .map_err(|e| e.to_string())?;
        verifications.norm_constraint = Some((&report).into());
    }
    if config.verify.rate_bound {
        verifications.rate_bound =
            Some(match analysis::verify_rate_bound(&trace, &reference.z, &ms, problem.rho()) {
                Ok(out) => (&out.report).into(),
                Err(asynciter::Error::InsufficientData(msg)) => {
                    VerifierOutcome::failed_with_note(msg)
                }
                Err(e) => return Err(e.to_string()),
            });
    }

    write_seed_artifacts(config, &trace, reference, &norm, &ms, problem.rho(), seed)?;

    let series = analysis::residual_series(&trace, &reference.z, &norm);
    let pass = [&verifications.freshness, &verifications.norm_constraint, &verifications.rate_bound]
        .into_iter()
        .flatten()
        .all(VerifierOutcome::pass);
    Ok(SeedSummary {
        seed,
        schedule_kind: config.schedule.kind.name().to_string(),
        horizon: schedule.horizon,
        validation,
        macro_iterations: ms.closed(),
        macro_complete: ms.complete,
        epochs: epochs.closed(),
        verifications,
        final_residual_umax: series.last().map(|p| p.umax),
        pass,
    })
}

fn write_seed_artifacts(
    config: &ExperimentConfig,
    trace: &engine::Trace,
    reference: &FixedPoint,
    norm: &BlockNorm,
    ms: &MacroIterations,
    rho: f64,
    seed: u64,
) -> Result<(), String> {
    let dir: &Path = &config.output_dir;
    let named = |name: String, e: asynciter::Error| format!("cannot write {name}: {e}");

    let residuals = File::create(dir.join(format!("residuals_seed{seed}.csv")))
        .map_err(|e| format!("cannot create residuals CSV: {e}"))?;
    analysis::residual_csv(trace, &reference.z, norm, ms, rho, BufWriter::new(residuals))
        .map_err(|e| named(format!("residuals_seed{seed}.csv"), e))?;

    let trace_file = File::create(dir.join(format!("trace_seed{seed}.csv")))
        .map_err(|e| format!("cannot create trace CSV: {e}"))?;
    trace
        .to_csv(BufWriter::new(trace_file))
        .map_err(|e| named(format!("trace_seed{seed}.csv"), e))?;

    if trace.policy.is_flexible() {
        let path = dir.join(format!("exchanged_seed{seed}.json"));
        let text = serde_json::to_string(&trace.exchanged_json())
            .map_err(|e| format!("cannot encode exchanged values: {e}"))?;
        fs::write(&path, text + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}
