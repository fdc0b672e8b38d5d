use std::sync::Arc;

use super::config::GuardConfig;
use super::engine::{run_guarded, SessionResult};
use crate::evaluator::Evaluator;
use crate::generator::Generator;
use crate::par::map_ordered;

/// One independent guarded session.
#[derive(Clone)]
pub struct SessionTask {
    pub task_id: String,
    pub question: String,
    pub generator: Arc<dyn Generator>,
    pub evaluator: Arc<dyn Evaluator>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskOutcome {
    pub task_id: String,
    pub result: SessionResult,
}

/// Runs every task as its own session, up to `jobs` at a time (`0` uses all
/// cores). Output is ordered by task id whatever the completion order.
pub fn run_batch(tasks: &[SessionTask], config: &GuardConfig, jobs: usize) -> Vec<TaskOutcome> {
    let mut order: Vec<&SessionTask> = tasks.iter().collect();
    order.sort_by(|a, b| a.task_id.cmp(&b.task_id));
    map_ordered(&order, jobs, |t| TaskOutcome {
        task_id: t.task_id.clone(),
        result: run_guarded(&t.question, t.generator.as_ref(), t.evaluator.as_ref(), config),
    })
}
