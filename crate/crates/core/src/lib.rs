//! Deterministic simulator and verification laboratory for parallel or
//! distributed asynchronous fixed-point iterations.
//!
//! Asynchrony is simulated, not raced: a [`schedule::Schedule`] fixes which
//! blocks update at each iteration and how stale the consumed values are
//! (with unbounded delays and out-of-order labels as first-class citizens),
//! the [`engine`] executes a prox-gradient operator against it and records a
//! complete trace, and the [`analysis`] module extracts macro-iteration and
//! epoch structure and verifies the exchange norm constraint and the
//! per-macro-iteration geometric rate bound against a high-accuracy reference
//! fixed point.
//!
//! ```
//! use asynciter::prelude::*;
//! use ndarray::Array1;
//!
//! let problem = Problem::new(
//!     diag_quadratic(&[1.0, 3.0], &[0.0, 0.0])?,
//!     NonsmoothPart::Zero,
//!     BlockPartition::singletons(2)?,
//!     None,
//! )?;
//! let operator = ProxGradientOperator::new(problem.clone(), 1)?;
//! let schedule = schedule::generate(ScheduleKind::Bounded { b: 3 }, 2, 100, 42)?;
//! let trace = engine::run(&operator, &Array1::from_elem(2, 5.0), &schedule, ExchangePolicy::Exact)?;
//! let reference = problem.reference_fixed_point(1e-12)?;
//! let macros = analysis::macro_iterations(&trace);
//! let bound = analysis::verify_rate_bound(&trace, &reference.z, &macros, problem.rho())?;
//! assert!(bound.report.pass);
//! # Ok::<(), asynciter::Error>(())
//! ```

pub mod analysis;
pub mod batch;
pub mod engine;
mod error;
pub mod operators;
pub mod oracle;
pub mod problem;
pub mod schedule;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::analysis::{self, BlockNorm, Epochs, MacroIterations, VerificationReport};
    pub use crate::engine::{self, ExchangePolicy, Trace};
    pub use crate::operators::ProxGradientOperator;
    pub use crate::problem::{
        diag_quadratic, random_dataset, random_spd_quadratic, BlockPartition, Dataset,
        NonsmoothPart, Problem, SmoothPart,
    };
    pub use crate::schedule::{self, DelayClass, Schedule, ScheduleKind};
    pub use crate::{Error, Result};
}
