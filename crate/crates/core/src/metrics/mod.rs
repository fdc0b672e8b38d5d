//! Evaluation: pass@k, execution-based error taxonomy, rollback
//! false-positive rates and cost reports.

mod cost;
mod fpr;
mod passk;
mod report;
mod taxonomy;

pub use cost::{cost_report, CostReport, CostRow};
pub use fpr::{fpr_csv, fpr_vector, rollback_fpr, Judgment, OracleEntry, RollbackOracle, TaskFpr};
pub use passk::pass_at_k;
pub use report::{render_table, BenchReport};
pub use taxonomy::{classify_error, error_histogram, ErrorClass, ErrorHistogram};

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{VerifierOutcome, VerifyStatus};
use crate::guard::GenerationTrace;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("{0}")]
    Invalid(String),
    #[error("oracle has no judgment for task {task_id} rollback {rollback_index}")]
    Uncovered { task_id: String, rollback_index: usize },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path} line {line}: {message}")]
    Parse { path: String, line: usize, message: String },
}

/// One generated program and how it fared.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleResult {
    pub code: String,
    pub verifier: VerifierOutcome,
    pub trace: Option<GenerationTrace>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskResult {
    pub task_id: String,
    pub samples: Vec<SampleResult>,
}

impl TaskResult {
    /// Flattens into result records, one per sample.
    pub fn records(&self, method: &str) -> Vec<ResultRecord> {
        self.samples
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let (tokens, wall) = match &s.trace {
                    Some(t) => (Some(t.totals.tokens), Some(t.totals.wall_ms)),
                    None => (None, None),
                };
                ResultRecord::new(&self.task_id, method, i as u32, s.verifier.status, tokens, wall)
            })
            .collect()
    }
}

/// One line of a results JSONL file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub task_id: String,
    pub method: String,
    pub sample_index: u32,
    pub status: VerifyStatus,
    pub error_class: ErrorClass,
    pub tokens: Option<u64>,
    pub wall_ms: Option<f64>,
}

impl ResultRecord {
    pub fn new(
        task_id: &str,
        method: &str,
        sample_index: u32,
        status: VerifyStatus,
        tokens: Option<u64>,
        wall_ms: Option<f64>,
    ) -> Self {
        Self {
            task_id: task_id.into(),
            method: method.into(),
            sample_index,
            status,
            error_class: classify_error(status),
            tokens,
            wall_ms,
        }
    }
}

pub fn write_results_jsonl(records: &[ResultRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRecord>, MetricsError> {
    let p = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| MetricsError::Io { path: p.clone(), message: e.to_string() })?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let rec = serde_json::from_str(line)
            .map_err(|e| MetricsError::Parse { path: p.clone(), line: i + 1, message: e.to_string() })?;
        out.push(rec);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskPassK {
    pub method: String,
    pub task_id: String,
    pub n: u64,
    pub c: u64,
    pub pass_at_k: f64,
}

/// pass@k per (method, task) plus the per-method mean over tasks.
pub fn pass_at_k_table(records: &[ResultRecord], k: u64) -> Result<(Vec<TaskPassK>, BTreeMap<String, f64>), MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::Invalid("no results".into()));
    }
    let mut counts: BTreeMap<(&str, &str), (u64, u64)> = BTreeMap::new();
    for r in records {
        let e = counts.entry((r.method.as_str(), r.task_id.as_str())).or_default();
        e.0 += 1;
        if r.status == VerifyStatus::Pass {
            e.1 += 1;
        }
    }
    let mut rows = Vec::with_capacity(counts.len());
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for ((method, task), (n, c)) in counts {
        let v = pass_at_k(n, c, k).map_err(|e| MetricsError::Invalid(format!("task {task} ({method}): {e}")))?;
        let s = sums.entry(method.to_string()).or_default();
        s.0 += v;
        s.1 += 1;
        rows.push(TaskPassK { method: method.into(), task_id: task.into(), n, c, pass_at_k: v });
    }
    Ok((rows, sums.into_iter().map(|(m, (s, n))| (m, s / n as f64)).collect()))
}
