use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::guard::{EventKind, GenerationTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Judgment {
    Justified,
    FalsePositive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleEntry {
    pub task_id: String,
    /// 0-based position among the trace's rollback events.
    pub rollback_index: usize,
    pub judgment: Judgment,
}

/// Ground-truth verdicts on rollback events.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RollbackOracle {
    judgments: BTreeMap<(String, usize), Judgment>,
}

impl RollbackOracle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, task_id: &str, rollback_index: usize, judgment: Judgment) {
        self.judgments.insert((task_id.to_string(), rollback_index), judgment);
    }

    pub fn get(&self, task_id: &str, rollback_index: usize) -> Option<Judgment> {
        self.judgments.get(&(task_id.to_string(), rollback_index)).copied()
    }

    /// Judges every rollback in `trace` against a known-good program: a
    /// rollback is a false positive when the rejected line is exactly the
    /// reference line at that position.
    pub fn judge_against_reference(&mut self, task_id: &str, trace: &GenerationTrace, reference: &[String]) {
        let mut last_proposal: Option<(usize, &str)> = None;
        let mut k = 0;
        for e in &trace.events {
            match e.kind {
                EventKind::LineProposed => last_proposal = Some((e.line_index, e.text.as_deref().unwrap_or(""))),
                EventKind::Rollback => {
                    let fp = last_proposal
                        .is_some_and(|(line, text)| reference.get(line.wrapping_sub(1)).is_some_and(|r| r == text));
                    self.insert(task_id, k, if fp { Judgment::FalsePositive } else { Judgment::Justified });
                    k += 1;
                }
                _ => {}
            }
        }
    }

    pub fn entries(&self) -> Vec<OracleEntry> {
        self.judgments
            .iter()
            .map(|((t, i), j)| OracleEntry { task_id: t.clone(), rollback_index: *i, judgment: *j })
            .collect()
    }

    pub fn from_entries(entries: Vec<OracleEntry>) -> Self {
        let mut o = Self::new();
        for e in entries {
            o.insert(&e.task_id, e.rollback_index, e.judgment);
        }
        o
    }
}

/// Per-task false-positive rate `M/N` over the trace's rollback events.
/// `None` when the trace has no rollbacks.
pub fn rollback_fpr(trace: &GenerationTrace, oracle: &RollbackOracle, task_id: &str) -> Result<Option<f64>, MetricsError> {
    let n = trace.count(EventKind::Rollback);
    if n == 0 {
        return Ok(None);
    }
    let mut m = 0;
    for k in 0..n {
        match oracle.get(task_id, k) {
            Some(Judgment::FalsePositive) => m += 1,
            Some(Judgment::Justified) => {}
            None => return Err(MetricsError::Uncovered { task_id: task_id.to_string(), rollback_index: k }),
        }
    }
    Ok(Some(m as f64 / n as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskFpr {
    pub task_id: String,
    pub rollbacks: usize,
    pub fpr: f64,
}

/// Per-task rates for every task with at least one rollback, in task order.
pub fn fpr_vector<'a, I>(traces: I, oracle: &RollbackOracle) -> Result<Vec<TaskFpr>, MetricsError>
where
    I: IntoIterator<Item = (&'a str, &'a GenerationTrace)>,
{
    let mut out = Vec::new();
    for (task_id, trace) in traces {
        if let Some(fpr) = rollback_fpr(trace, oracle, task_id)? {
            out.push(TaskFpr { task_id: task_id.to_string(), rollbacks: trace.count(EventKind::Rollback), fpr });
        }
    }
    out.sort_by(|a, b| a.task_id.cmp(&b.task_id));
    Ok(out)
}

pub fn fpr_csv(rows: &[TaskFpr]) -> String {
    let mut out = String::from("task_id,rollbacks,fpr\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.task_id, r.rollbacks, r.fpr));
    }
    out
}
