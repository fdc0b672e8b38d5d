use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CostReport, ErrorHistogram, TaskFpr};

/// Everything `bench compare` reports, keyed by method.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub cost: CostReport,
    pub errors: BTreeMap<String, ErrorHistogram>,
    /// Per-task rollback false-positive rates; tasks without rollbacks are
    /// left out.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fpr: BTreeMap<String, Vec<TaskFpr>>,
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Aligned plain-text table, one row per method.
    pub fn to_text(&self) -> String {
        let header = ["method", "tasks", "samples", "pass@1", "mean_tokens", "mean_wall_ms", "syntax", "runtime", "semantic"];
        let mut rows: Vec<Vec<String>> = vec![header.iter().map(|h| h.to_string()).collect()];
        for r in &self.cost.rows {
            let h = self.errors.get(&r.method).copied().unwrap_or_default();
            rows.push(vec![
                r.method.clone(),
                r.tasks.to_string(),
                r.samples.to_string(),
                format!("{:.4}", r.pass_at_1),
                format!("{:.2}", r.mean_tokens),
                format!("{:.2}", r.mean_wall_ms),
                h.syntax.to_string(),
                h.runtime.to_string(),
                h.semantic.to_string(),
            ]);
        }
        render_table(&rows)
    }
}

/// First column left-aligned, the rest right-aligned, two spaces apart.
pub fn render_table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..cols).map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| if c == 0 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}
