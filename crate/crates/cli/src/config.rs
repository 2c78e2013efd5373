//! Experiment configuration: JSON with a published schema
//! (`schemas/experiment-config.schema.json`). Relative paths inside a config
//! resolve against the config file's directory.

use std::path::{Path, PathBuf};

use asynciter::engine::ExchangePolicy;
use asynciter::problem::{
    diag_quadratic, random_dataset, random_spd_quadratic, BlockPartition, NonsmoothPart,
    NonsmoothSpec, Problem, ProblemSpec, SmoothPart,
};
use asynciter::schedule::{self, Schedule, ScheduleKind};
use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSource,
    #[serde(default)]
    pub operator: OperatorConfig,
    pub schedule: ScheduleConfig,
    #[serde(default = "default_policy")]
    pub policy: ExchangePolicy,
    #[serde(default)]
    pub x0: X0Config,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default = "default_reference_tol")]
    pub reference_tol: f64,
    pub output_dir: PathBuf,
}

fn default_policy() -> ExchangePolicy {
    ExchangePolicy::Exact
}

fn default_reference_tol() -> f64 {
    1e-12
}

/// Exactly one of `file`, `inline`, `generator`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSource {
    #[serde(default)]
    pub file: Option<PathBuf>,
    #[serde(default)]
    pub inline: Option<ProblemSpec>,
    #[serde(default)]
    pub generator: Option<GeneratorSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    RandomSpdQuadratic {
        dim: usize,
        mu: f64,
        lipschitz: f64,
        #[serde(default = "default_coupling")]
        coupling: f64,
        seed: u64,
        n_blocks: usize,
        g: NonsmoothSpec,
        #[serde(default)]
        gamma: Option<f64>,
    },
    DiagQuadratic {
        diag: Vec<f64>,
        b: Vec<f64>,
        n_blocks: usize,
        g: NonsmoothSpec,
        #[serde(default)]
        gamma: Option<f64>,
    },
    RandomRidge {
        samples: usize,
        dim: usize,
        ridge: f64,
        seed: u64,
        n_blocks: usize,
        g: NonsmoothSpec,
        #[serde(default)]
        gamma: Option<f64>,
    },
}

fn default_coupling() -> f64 {
    0.25
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    #[serde(default = "default_inner_steps")]
    pub inner_steps: usize,
    /// Step-size override; the problem's own gamma (or the default right
    /// endpoint) applies when absent.
    #[serde(default)]
    pub gamma: Option<f64>,
}

fn default_inner_steps() -> usize {
    1
}

impl Default for OperatorConfig {
    fn default() -> Self {
        OperatorConfig { inner_steps: 1, gamma: None }
    }
}

#[derive(Debug, Deserialize)]
pub struct ScheduleConfig {
    #[serde(flatten)]
    pub kind: ScheduleKindConfig,
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleKindConfig {
    Synchronous,
    Bounded { b: usize },
    UnboundedAdmissible,
    Baudet,
    OutOfOrder { reorder_rate: f64 },
    /// Load the schedule from a JSON file instead of generating it.
    File { path: PathBuf },
}

impl ScheduleKindConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ScheduleKindConfig::Synchronous => "synchronous",
            ScheduleKindConfig::Bounded { .. } => "bounded",
            ScheduleKindConfig::UnboundedAdmissible => "unbounded_admissible",
            ScheduleKindConfig::Baudet => "baudet",
            ScheduleKindConfig::OutOfOrder { .. } => "out_of_order",
            ScheduleKindConfig::File { .. } => "file",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum X0Config {
    SeededUniform { lo: f64, hi: f64 },
    Explicit { values: Vec<f64> },
}

impl Default for X0Config {
    fn default() -> Self {
        X0Config::SeededUniform { lo: -1.0, hi: 1.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "enabled")]
    pub schedule: bool,
    #[serde(default = "enabled")]
    pub freshness: bool,
    #[serde(default = "enabled")]
    pub norm_constraint: bool,
    #[serde(default = "enabled")]
    pub rate_bound: bool,
}

fn enabled() -> bool {
    true
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { schedule: true, freshness: true, norm_constraint: true, rate_bound: true }
    }
}

impl ExperimentConfig {
    /// Parses and validates a config file; relative paths become absolute
    /// against the config's directory.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut config: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| format!("malformed config: {e}"))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        if let Some(f) = &mut config.problem.file {
            *f = resolve(base, f);
        }
        if let ScheduleKindConfig::File { path } = &mut config.schedule.kind {
            *path = resolve(base, path);
        }
        config.output_dir = resolve(base, &config.output_dir);
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), String> {
        let sources = [
            self.problem.file.is_some(),
            self.problem.inline.is_some(),
            self.problem.generator.is_some(),
        ];
        if sources.iter().filter(|&&s| s).count() != 1 {
            return Err(
                "field `problem` must set exactly one of `file`, `inline`, `generator`".into()
            );
        }
        if let Some(f) = &self.problem.file {
            if !f.exists() {
                return Err(format!("field `problem.file`: {} does not exist", f.display()));
            }
        }
        if self.schedule.seeds.is_empty() {
            return Err("field `schedule.seeds` must be nonempty".into());
        }
        match &self.schedule.kind {
            ScheduleKindConfig::File { path } => {
                if !path.exists() {
                    return Err(format!(
                        "field `schedule.path`: {} does not exist",
                        path.display()
                    ));
                }
            }
            _ => match self.schedule.horizon {
                None => return Err("field `schedule.horizon` is required for generated schedules".into()),
                Some(0) => return Err("field `schedule.horizon` must be at least 1".into()),
                Some(_) => {}
            },
        }
        if let ScheduleKindConfig::Bounded { b: 0 } = self.schedule.kind {
            return Err("field `schedule.b` must be at least 1".into());
        }
        if self.operator.inner_steps == 0 {
            return Err("field `operator.inner_steps` must be at least 1".into());
        }
        if !(self.reference_tol > 0.0) {
            return Err("field `reference_tol` must be positive".into());
        }
        if let X0Config::SeededUniform { lo, hi } = &self.x0 {
            if !(lo < hi) {
                return Err("field `x0`: need lo < hi".into());
            }
        }
        Ok(())
    }

    pub fn build_problem(&self) -> Result<Problem, String> {
        let named = |e: asynciter::Error| format!("field `problem`: {e}");
        let problem = if let Some(path) = &self.problem.file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read problem file {}: {e}", path.display()))?;
            serde_json::from_str::<Problem>(&text)
                .map_err(|e| format!("malformed problem file {}: {e}", path.display()))?
        } else if let Some(spec) = &self.problem.inline {
            Problem::try_from(spec.clone()).map_err(named)?
        } else {
            let generator = self.problem.generator.as_ref().expect("validated");
            build_generated(generator).map_err(named)?
        };
        match self.operator.gamma {
            Some(gamma) => problem
                .with_gamma(Some(gamma))
                .map_err(|e| format!("field `operator.gamma`: {e}")),
            None => Ok(problem),
        }
    }

    /// Generates or loads the schedule for one seed.
    pub fn build_schedule(&self, n_blocks: usize, seed: u64) -> Result<Schedule, String> {
        let kind = match &self.schedule.kind {
            ScheduleKindConfig::Synchronous => ScheduleKind::Synchronous,
            ScheduleKindConfig::Bounded { b } => ScheduleKind::Bounded { b: *b },
            ScheduleKindConfig::UnboundedAdmissible => ScheduleKind::UnboundedAdmissible,
            ScheduleKindConfig::Baudet => ScheduleKind::Baudet,
            ScheduleKindConfig::OutOfOrder { reorder_rate } => {
                ScheduleKind::OutOfOrder { reorder_rate: *reorder_rate }
            }
            ScheduleKindConfig::File { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read schedule {}: {e}", path.display()))?;
                let s: Schedule = serde_json::from_str(&text)
                    .map_err(|e| format!("malformed schedule {}: {e}", path.display()))?;
                if s.n_blocks != n_blocks {
                    return Err(format!(
                        "schedule file has {} blocks, problem has {n_blocks}",
                        s.n_blocks
                    ));
                }
                return Ok(s);
            }
        };
        let horizon = self.schedule.horizon.expect("validated");
        schedule::generate(kind, n_blocks, horizon, seed)
            .map_err(|e| format!("field `schedule`: {e}"))
    }

    pub fn build_x0(&self, dim: usize, seed: u64) -> Result<Array1<f64>, String> {
        match &self.x0 {
            X0Config::SeededUniform { lo, hi } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ X0_SALT);
                Ok(Array1::from_shape_fn(dim, |_| rng.gen_range(*lo..*hi)))
            }
            X0Config::Explicit { values } => {
                if values.len() != dim {
                    return Err(format!(
                        "field `x0.values` has {} entries, problem dimension is {dim}",
                        values.len()
                    ));
                }
                Ok(Array1::from_vec(values.clone()))
            }
        }
    }
}

const X0_SALT: u64 = 0x05ee_d0f0_5eed_0f00;

fn build_generated(generator: &GeneratorSpec) -> asynciter::Result<Problem> {
    match generator.clone() {
        GeneratorSpec::RandomSpdQuadratic { dim, mu, lipschitz, coupling, seed, n_blocks, g, gamma } => {
            let f = random_spd_quadratic(dim, mu, lipschitz, coupling, seed)?;
            Problem::new(f, NonsmoothPart::try_from(g)?, BlockPartition::contiguous(dim, n_blocks)?, gamma)
        }
        GeneratorSpec::DiagQuadratic { diag, b, n_blocks, g, gamma } => {
            let dim = diag.len();
            let f = diag_quadratic(&diag, &b)?;
            Problem::new(f, NonsmoothPart::try_from(g)?, BlockPartition::contiguous(dim, n_blocks)?, gamma)
        }
        GeneratorSpec::RandomRidge { samples, dim, ridge, seed, n_blocks, g, gamma } => {
            let f = SmoothPart::ridge_least_squares(random_dataset(samples, dim, seed)?, ridge)?;
            Problem::new(f, NonsmoothPart::try_from(g)?, BlockPartition::contiguous(dim, n_blocks)?, gamma)
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
