use std::collections::VecDeque;
use std::sync::Mutex;

use thiserror::Error;

use super::config::GuardConfig;
use super::engine::{run_guarded, SessionResult};
use super::trace::{EventKind, GenerationTrace};
use crate::evaluator::{EvaluatorError, EvaluatorRequest, EvaluatorScore};
use crate::generator::Generator;

#[derive(Debug, Error, PartialEq)]
pub enum ReplayError {
    #[error("replay diverged at event {index}")]
    Diverged { index: usize },
    #[error("replay produced {replayed} events, trace has {recorded}")]
    Length { recorded: usize, replayed: usize },
}

/// Re-runs a session against `generator`, answering every scoring call with
/// the score recorded in `trace`, and checks that the same decisions come
/// out. Returns the replayed session.
pub fn replay(
    trace: &GenerationTrace,
    question: &str,
    generator: &dyn Generator,
    config: &GuardConfig,
) -> Result<SessionResult, ReplayError> {
    let scores: VecDeque<f64> =
        trace.events.iter().filter(|e| e.kind == EventKind::PrefixScored).filter_map(|e| e.score).collect();
    let scores = Mutex::new(scores);
    let recorded = |_: &EvaluatorRequest| -> Result<EvaluatorScore, EvaluatorError> {
        let next = scores.lock().expect("replay score queue").pop_front();
        match next {
            Some(s) => EvaluatorScore::new(s),
            None => Err(EvaluatorError::Transport { attempts: 1, message: "trace has no further scores".into() }),
        }
    };
    let result = run_guarded(question, generator, &recorded, config);
    let (a, b) = (&trace.events, &result.trace.events);
    if let Some(index) = a.iter().zip(b).position(|(x, y)| !x.same_decision(y)) {
        return Err(ReplayError::Diverged { index });
    }
    if a.len() != b.len() {
        return Err(ReplayError::Length { recorded: a.len(), replayed: b.len() });
    }
    Ok(result)
}
