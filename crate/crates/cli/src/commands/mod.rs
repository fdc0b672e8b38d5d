pub mod bench;
pub mod calibrate;
pub mod corpus;
pub mod eval;
pub mod guard;

use std::path::Path;

use lineguard_core::corpus::{verify, CorpusError, Submission, Verdict, VerifyStatus};
use lineguard_core::guard::{run_batch, GuardConfig, Policy, SessionOutcome, SessionResult, SessionTask};
use lineguard_core::hashing::stable_hash;
use lineguard_core::metrics::ResultRecord;
use lineguard_core::par::map_ordered;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::write_file;
use crate::tasks::TaskSpec;

/// One generated program with its verification status.
pub struct SampleOutput {
    pub task_id: String,
    pub sample_index: u32,
    pub result: SessionResult,
    pub status: Option<VerifyStatus>,
    pub verify_error: Option<String>,
}

impl SampleOutput {
    fn file_stem(&self, samples: u32) -> String {
        if samples == 1 {
            self.task_id.clone()
        } else {
            format!("{}_{}", self.task_id, self.sample_index)
        }
    }

    pub fn record(&self, method: &str) -> Option<ResultRecord> {
        let t = &self.result.trace.totals;
        self.status
            .map(|s| ResultRecord::new(&self.task_id, method, self.sample_index, s, Some(t.tokens), Some(t.wall_ms)))
    }

    pub fn is_failure(&self) -> bool {
        self.result.outcome == SessionOutcome::Failed || self.verify_error.is_some()
    }
}

#[derive(Serialize)]
struct SessionLine<'a> {
    task_id: &'a str,
    sample_index: u32,
    outcome: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    status: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verify_error: Option<&'a str>,
    lines: usize,
    tokens: u64,
    rollbacks: u64,
}

/// Seed for sample `s`: the configured seed itself for the first sample.
pub fn sample_seed(seed: u64, sample: u32) -> u64 {
    if sample == 0 {
        seed
    } else {
        stable_hash(&[seed, sample as u64])
    }
}

/// Runs every task `cfg.samples` times under `policy`, verifies the programs
/// when a runner is configured, and writes code, traces and a session log
/// into `dir`.
pub fn run_policy(
    cfg: &RunConfig,
    specs: &[TaskSpec],
    sessions: &[SessionTask],
    policy: Policy,
    dir: &Path,
) -> CliResult<Vec<SampleOutput>> {
    let mut outputs = Vec::new();
    for s in 0..cfg.samples {
        let guard = GuardConfig { policy, seed: sample_seed(cfg.guard.seed, s), ..cfg.guard.clone() };
        for o in run_batch(sessions, &guard, cfg.jobs) {
            outputs.push(SampleOutput {
                task_id: o.task_id,
                sample_index: s,
                result: o.result,
                status: None,
                verify_error: None,
            });
        }
    }
    outputs.sort_by(|a, b| (&a.task_id, a.sample_index).cmp(&(&b.task_id, b.sample_index)));

    if let Some(runner) = &cfg.runner {
        let checks = map_ordered(&outputs, cfg.jobs, |o| {
            let spec = specs.iter().find(|t| t.task_id == o.task_id)?;
            if spec.tests.is_empty() || o.result.outcome == SessionOutcome::Failed {
                return None;
            }
            let sub = Submission {
                submission_id: o.task_id.clone(),
                problem_id: o.task_id.clone(),
                user_id: String::new(),
                verdict: Verdict::Unknown,
                source_lines: o.result.lines.clone(),
            };
            Some(verify(&sub, &spec.tests, runner))
        });
        for (o, check) in outputs.iter_mut().zip(checks) {
            match check {
                Some(Ok(v)) => o.status = Some(v.status),
                Some(Err(CorpusError::Config(m))) => return Err(CliError::config(m)),
                Some(Err(e)) => o.verify_error = Some(e.to_string()),
                None => {}
            }
        }
    }

    let mut log = String::new();
    for o in &outputs {
        let stem = o.file_stem(cfg.samples);
        write_file(&dir.join("code").join(format!("{stem}.{}", cfg.code_extension)), o.result.code().as_bytes())?;
        write_file(&dir.join("traces").join(format!("{stem}.jsonl")), o.result.trace.to_jsonl().as_bytes())?;
        let line = SessionLine {
            task_id: &o.task_id,
            sample_index: o.sample_index,
            outcome: o.result.outcome.as_str(),
            detail: o.result.detail.as_deref(),
            status: o.status.map(VerifyStatus::as_str),
            verify_error: o.verify_error.as_deref(),
            lines: o.result.lines.len(),
            tokens: o.result.trace.totals.tokens,
            rollbacks: o.result.trace.totals.rollbacks,
        };
        log.push_str(&serde_json::to_string(&line).expect("session line serializes"));
        log.push('\n');
    }
    write_file(&dir.join("sessions.jsonl"), log.as_bytes())?;
    Ok(outputs)
}

/// Outcome counts for manifests and the console.
pub fn outcome_summary(outputs: &[SampleOutput]) -> serde_json::Value {
    let count = |o: SessionOutcome| outputs.iter().filter(|s| s.result.outcome == o).count();
    serde_json::json!({
        "sessions": outputs.len(),
        "completed": count(SessionOutcome::Completed),
        "budget_exhausted": count(SessionOutcome::BudgetExhausted),
        "failed": count(SessionOutcome::Failed),
        "verified": outputs.iter().filter(|o| o.status.is_some()).count(),
        "passed": outputs.iter().filter(|o| o.status == Some(VerifyStatus::Pass)).count(),
        "verify_errors": outputs.iter().filter(|o| o.verify_error.is_some()).count(),
    })
}
