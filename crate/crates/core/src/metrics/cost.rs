use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{pass_at_k, MetricsError, ResultRecord};
use crate::corpus::VerifyStatus;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub method: String,
    pub tasks: usize,
    pub samples: usize,
    /// Mean over tasks of per-task pass@1.
    pub pass_at_1: f64,
    pub mean_tokens: f64,
    pub mean_wall_ms: f64,
    pub total_tokens: u64,
    pub total_wall_ms: f64,
    /// Samples without token or timing metadata, left out of the means.
    pub excluded: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub rows: Vec<CostRow>,
}

/// Per-method costs, one row per method in name order.
pub fn cost_report(records: &[ResultRecord]) -> Result<CostReport, MetricsError> {
    let mut by_method: BTreeMap<&str, Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        by_method.entry(r.method.as_str()).or_default().push(r);
    }
    let mut rows = Vec::with_capacity(by_method.len());
    for (method, recs) in by_method {
        let mut per_task: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
        for r in &recs {
            let e = per_task.entry(r.task_id.as_str()).or_default();
            e.0 += 1;
            if r.status == VerifyStatus::Pass {
                e.1 += 1;
            }
        }
        let mut pass_sum = 0.0;
        for (n, c) in per_task.values() {
            pass_sum += pass_at_k(*n, *c, 1)?;
        }
        let timed: Vec<(u64, f64)> = recs.iter().filter_map(|r| Some((r.tokens?, r.wall_ms?))).collect();
        let total_tokens: u64 = timed.iter().map(|t| t.0).sum();
        let total_wall_ms: f64 = timed.iter().map(|t| t.1).sum();
        let denom = timed.len().max(1) as f64;
        rows.push(CostRow {
            method: method.to_string(),
            tasks: per_task.len(),
            samples: recs.len(),
            pass_at_1: pass_sum / per_task.len() as f64,
            mean_tokens: total_tokens as f64 / denom,
            mean_wall_ms: total_wall_ms / denom,
            total_tokens,
            total_wall_ms,
            excluded: recs.len() - timed.len(),
        });
    }
    Ok(CostReport { rows })
}
