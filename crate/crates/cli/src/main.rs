//! `asynciter` — experiment runner for asynchronous fixed-point iteration
//! simulations.
//!
//! Exit codes: 0 all verifications passed, 1 input error, 2 verification
//! failure or oracle mismatch.

mod config;
mod experiment;

use std::path::PathBuf;
use std::process::ExitCode;

use asynciter::analysis;
use asynciter::oracle;
use asynciter::problem::NonsmoothPart;
use asynciter::schedule::{self, Schedule, ScheduleKind};
use clap::{Parser, Subcommand};
use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "asynciter", version, about = "Simulate and verify asynchronous fixed-point iterations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config: schedules, engine, verifiers, CSV/JSON outputs
    Run {
        config: PathBuf,
        /// Replace the config's seed list with a single seed
        #[arg(long)]
        seed_override: Option<u64>,
        /// Override the config's output directory
        #[arg(long)]
        output: Option<PathBuf>,
        /// Suppress per-seed progress lines
        #[arg(long)]
        quiet: bool,
    },
    /// Validate a schedule JSON file
    Validate {
        schedule: PathBuf,
        /// Also write the schedule as CSV rows (j, S_j bitmask, labels)
        #[arg(long)]
        export_csv: Option<PathBuf>,
    },
    /// Diff a brute-force oracle against the main implementation
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// Summarize summary.json files under a directory
    Report { dir: PathBuf },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Macro-iteration tracker vs. literal definition on random schedules
    Macro {
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
    /// Closed-form prox vs. 1-D grid argmin
    Prox {
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
    /// Two-processor schedule generator vs. event-sorting model
    Baudet {
        #[arg(long, default_value_t = 10_000)]
        horizon: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap help/version output is not an error.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::from(0);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Run { config, seed_override, output, quiet } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seed) = seed_override {
                cfg.schedule.seeds = vec![seed];
            }
            if let Some(dir) = output {
                cfg.output_dir = dir;
            }
            let summary = experiment::run_experiment(&cfg, quiet)?;
            if !quiet {
                println!(
                    "overall: {} (summary at {})",
                    if summary.overall_pass { "PASS" } else { "FAIL" },
                    cfg.output_dir.join("summary.json").display()
                );
            }
            Ok(if summary.overall_pass { 0 } else { 2 })
        }
        Command::Validate { schedule, export_csv } => {
            let text = std::fs::read_to_string(&schedule)
                .map_err(|e| format!("cannot read {}: {e}", schedule.display()))?;
            let s: Schedule = serde_json::from_str(&text)
                .map_err(|e| format!("malformed schedule {}: {e}", schedule.display()))?;
            if let Some(path) = export_csv {
                let file = std::fs::File::create(&path)
                    .map_err(|e| format!("cannot create {}: {e}", path.display()))?;
                s.to_csv(std::io::BufWriter::new(file)).map_err(|e| e.to_string())?;
            }
            let report = schedule::validate(&s);
            let rendered = serde_json::to_string_pretty(&report)
                .map_err(|e| format!("cannot encode report: {e}"))?;
            println!("{rendered}");
            Ok(if report.overall { 0 } else { 2 })
        }
        Command::Oracle { which } => match which {
            OracleCommand::Macro { count } => oracle_macro(count),
            OracleCommand::Prox { points } => oracle_prox(points),
            OracleCommand::Baudet { horizon } => oracle_baudet(horizon),
        },
        Command::Report { dir } => report_dir(&dir),
    }
}

fn oracle_macro(count: usize) -> Result<u8, String> {
    for seed in 0..count as u64 {
        let n_blocks = 1 + (seed as usize % 4);
        let horizon = 10 + (seed as usize * 13) % 51;
        let s = oracle::random_raw_schedule(n_blocks, horizon, seed);
        let incremental = analysis::macro_iterations_of(&s).indices;
        let brute = oracle::macro_iterations_brute_force(&s);
        if incremental != brute {
            println!(
                "MISMATCH at seed {seed} (n_blocks={n_blocks}, horizon={horizon}):\n  incremental: {incremental:?}\n  brute force: {brute:?}"
            );
            return Ok(2);
        }
    }
    println!("MATCH {count}/{count}");
    Ok(0)
}

fn oracle_prox(points: usize) -> Result<u8, String> {
    let l1 = NonsmoothPart::l1(0.35).map_err(|e| e.to_string())?;
    let boxed = NonsmoothPart::box_constraint(
        Array1::from_elem(1, -0.8),
        Array1::from_elem(1, 1.3),
    )
    .map_err(|e| e.to_string())?;
    let gamma = 0.6;
    let resolution = 1e-4;
    let mut rng = ChaCha8Rng::seed_from_u64(321);
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let x: f64 = rng.gen_range(-4.0..4.0);
        let t = gamma * 0.35;
        let closed_l1 = if x > t {
            x - t
        } else if x < -t {
            x + t
        } else {
            0.0
        };
        let cases = [
            ("l1", closed_l1, oracle::prox_grid_1d(&l1, x, gamma, resolution)),
            ("box", x.clamp(-0.8, 1.3), oracle::prox_grid_1d(&boxed, x, gamma, resolution)),
        ];
        for (kind, closed, grid) in cases {
            let dev = (closed - grid).abs();
            worst = worst.max(dev);
            if dev > resolution {
                println!("MISMATCH: {kind} prox at x={x}: closed {closed}, grid {grid}, deviation {dev:e}");
                return Ok(2);
            }
        }
    }
    println!("MATCH {points} points, max deviation {worst:e} <= {resolution:e}");
    Ok(0)
}

fn oracle_baudet(horizon: usize) -> Result<u8, String> {
    let generated =
        schedule::generate(ScheduleKind::Baudet, 2, horizon, 0).map_err(|e| e.to_string())?;
    let reference = oracle::baudet_schedule_by_sorting(horizon);
    for j in 1..=horizon {
        let (a, b) = (generated.event(j), reference.event(j));
        if a != b {
            println!(
                "MISMATCH at j={j}: generator (S={:?}, l={:?}) vs oracle (S={:?}, l={:?})",
                a.active, a.labels, b.active, b.labels
            );
            return Ok(2);
        }
    }
    println!("MATCH horizon={horizon}, label sequences identical");
    Ok(0)
}

fn report_dir(dir: &std::path::Path) -> Result<u8, String> {
    let mut summaries = Vec::new();
    let entries = std::fs::read_dir(dir).map_err(|e| format!("cannot read {}: {e}", dir.display()))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("summary") && n.ends_with(".json"))
        })
        .collect();
    // Also accept run directories nested one level down.
    let nested = std::fs::read_dir(dir).map_err(|e| e.to_string())?;
    for entry in nested.filter_map(|e| e.ok()) {
        let candidate = entry.path().join("summary.json");
        if candidate.is_file() {
            paths.push(candidate);
        }
    }
    paths.sort();
    paths.dedup();
    if paths.is_empty() {
        return Err(format!("no summary.json files under {}", dir.display()));
    }
    for path in paths {
        let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| format!("malformed {}: {e}", path.display()))?;
        summaries.push((path, value));
    }
    let mut all_pass = true;
    println!("{:<40} {:>6} {:>8} {:>8}", "summary", "seeds", "macro", "overall");
    for (path, value) in &summaries {
        let seeds = value["seeds"].as_array().map_or(0, |s| s.len());
        let macros: u64 = value["seeds"]
            .as_array()
            .map(|s| s.iter().filter_map(|x| x["macro_iterations"].as_u64()).sum())
            .unwrap_or(0);
        let pass = value["overall_pass"].as_bool().unwrap_or(false);
        all_pass &= pass;
        println!(
            "{:<40} {seeds:>6} {macros:>8} {:>8}",
            path.display().to_string(),
            if pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(if all_pass { 0 } else { 2 })
}
