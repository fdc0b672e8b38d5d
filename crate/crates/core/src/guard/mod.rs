//! Decode-time supervision.
//!
//! [`run_guarded`] drives a [`Generator`](crate::generator::Generator) one
//! line at a time, asks an [`Evaluator`](crate::evaluator::Evaluator) to
//! score every growing prefix, and on rejection applies one of four
//! [`Policy`] variants: line rollback with a first-token penalty, line
//! rollback with plain resampling, a restart of the whole program, or line
//! rollback with penalties that decay over recently rejected tokens.

mod batch;
mod config;
mod engine;
mod replay;
mod trace;

pub use batch::{run_batch, SessionTask, TaskOutcome};
pub use config::{ConfigError, GuardConfig, Policy, TimingMode};
pub use engine::{derive_seed, edp_factors, is_evaluable_line, run_guarded, SessionOutcome, SessionResult, EDP_DEPTH};
pub use replay::{replay, ReplayError};
pub use trace::{EventKind, GenerationTrace, TraceEvent, TraceParseError, TraceTotals};
