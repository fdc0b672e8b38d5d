//! Task files and client construction.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use lineguard_core::corpus::TestCase;
use lineguard_core::evaluator::{Evaluator, RemoteEvaluator, ScriptedEvaluator};
use lineguard_core::generator::{Generator, RemoteGenerator, ScriptedGenerator};
use lineguard_core::guard::SessionTask;
use serde::Deserialize;

use crate::config::{EvaluatorSpec, GeneratorSpec, RunConfig};
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;

/// One line of the tasks JSONL file. Paths are relative to that file.
#[derive(Debug, Clone, Deserialize)]
pub struct TaskSpec {
    pub task_id: String,
    pub question: String,
    #[serde(default)]
    pub scenario: Option<PathBuf>,
    #[serde(default)]
    pub evaluator_table: Option<PathBuf>,
    #[serde(default)]
    pub tests: Vec<TestCase>,
    /// A known-good program used to judge rollbacks.
    #[serde(default)]
    pub reference: Option<Vec<String>>,
}

fn valid_task_id(id: &str) -> bool {
    !id.is_empty()
        && id != "."
        && id != ".."
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

pub fn load_tasks(path: &Path, manifest: &mut RunManifest) -> CliResult<Vec<TaskSpec>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    manifest.digest(path, text.as_bytes());
    let base = path.parent().unwrap_or(Path::new(""));
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let mut t: TaskSpec = serde_json::from_str(line)
            .map_err(|e| CliError::config(format!("{}:{}: {e}", path.display(), i + 1)))?;
        if !valid_task_id(&t.task_id) {
            return Err(CliError::config(format!("{}:{}: invalid task id {:?}", path.display(), i + 1, t.task_id)));
        }
        if !seen.insert(t.task_id.clone()) {
            return Err(CliError::config(format!("{}:{}: duplicate task id {}", path.display(), i + 1, t.task_id)));
        }
        for p in [t.scenario.as_mut(), t.evaluator_table.as_mut()].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        out.push(t);
    }
    if out.is_empty() {
        return Err(CliError::config(format!("{}: no tasks", path.display())));
    }
    Ok(out)
}

/// Builds one session per task. Remote clients are shared across tasks.
pub fn session_tasks(cfg: &RunConfig, tasks: &[TaskSpec], manifest: &mut RunManifest) -> CliResult<Vec<SessionTask>> {
    let shared_gen: Option<Arc<dyn Generator>> = match &cfg.generator {
        GeneratorSpec::Scripted => None,
        GeneratorSpec::Remote(c) => {
            Some(Arc::new(RemoteGenerator::new(c.clone()).map_err(|e| CliError::config(e.to_string()))?))
        }
    };
    let shared_eval: Option<Arc<dyn Evaluator>> = match &cfg.evaluator {
        EvaluatorSpec::Scripted { table: None } => None,
        spec => Some(build_evaluator(spec, manifest)?),
    };
    let mut out = Vec::with_capacity(tasks.len());
    for t in tasks {
        let generator = match &shared_gen {
            Some(g) => g.clone(),
            None => {
                let path = t.scenario.as_ref().ok_or_else(|| {
                    CliError::config(format!("task {}: scripted generator needs a scenario", t.task_id))
                })?;
                manifest.digest_file(path)?;
                let g = ScriptedGenerator::load(path).map_err(|e| CliError::config(format!("task {}: {e}", t.task_id)))?;
                Arc::new(g) as Arc<dyn Generator>
            }
        };
        let evaluator = match &shared_eval {
            Some(e) => e.clone(),
            None => {
                let path = t.evaluator_table.as_ref().ok_or_else(|| {
                    CliError::config(format!("task {}: scripted evaluator needs an evaluator_table", t.task_id))
                })?;
                manifest.digest_file(path)?;
                let e = ScriptedEvaluator::load(path).map_err(|e| CliError::config(format!("task {}: {e}", t.task_id)))?;
                Arc::new(e) as Arc<dyn Evaluator>
            }
        };
        out.push(SessionTask { task_id: t.task_id.clone(), question: t.question.clone(), generator, evaluator });
    }
    Ok(out)
}

/// A single evaluator from a spec; scripted specs must name a table.
pub fn build_evaluator(spec: &EvaluatorSpec, manifest: &mut RunManifest) -> CliResult<Arc<dyn Evaluator>> {
    Ok(match spec {
        EvaluatorSpec::Scripted { table: Some(path) } => {
            manifest.digest_file(path)?;
            Arc::new(ScriptedEvaluator::load(path).map_err(|e| CliError::config(e.to_string()))?)
        }
        EvaluatorSpec::Scripted { table: None } => {
            return Err(CliError::config("scripted evaluator needs a table path"));
        }
        EvaluatorSpec::Constant { score } => {
            Arc::new(ScriptedEvaluator::constant(*score).map_err(|e| CliError::config(e.to_string()))?)
        }
        EvaluatorSpec::Remote(c) => Arc::new(RemoteEvaluator::new(c.clone()).map_err(|e| CliError::config(e.to_string()))?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_ids_must_be_file_safe() {
        assert!(valid_task_id("p001_a-1.x"));
        assert!(!valid_task_id("../x"));
        assert!(!valid_task_id(".."));
        assert!(!valid_task_id(""));
        assert!(!valid_task_id("a b"));
    }
}
