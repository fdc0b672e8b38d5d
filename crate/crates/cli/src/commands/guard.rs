use std::path::Path;

use lineguard_core::metrics::write_results_jsonl;

use crate::config::{Overrides, RunConfig};
use crate::error::{CliError, CliResult, EXIT_PARTIAL};
use crate::manifest::{write_file, RunManifest};
use crate::tasks::{load_tasks, session_tasks};

use super::{outcome_summary, run_policy};

pub fn run(config_path: &Path, overrides: &Overrides) -> CliResult<u8> {
    let (cfg, raw) = RunConfig::load(config_path, overrides)?;
    let mut manifest = RunManifest::start("guard run", cfg.hash());
    manifest.digest(config_path, &raw);
    let tasks_path = cfg.tasks.clone().ok_or_else(|| CliError::config("no tasks file: set \"tasks\" or pass --tasks"))?;
    if let Some(r) = &cfg.runner {
        r.preflight().map_err(|e| CliError::config(e.to_string()))?;
    }
    let specs = load_tasks(&tasks_path, &mut manifest)?;
    let sessions = session_tasks(&cfg, &specs, &mut manifest)?;

    let outputs = run_policy(&cfg, &specs, &sessions, cfg.guard.policy, &cfg.out_dir)?;
    let method = cfg.guard.policy.as_str();
    let records: Vec<_> = outputs.iter().filter_map(|o| o.record(method)).collect();
    if cfg.runner.is_some() {
        write_file(&cfg.out_dir.join("results.jsonl"), write_results_jsonl(&records).as_bytes())?;
    }

    for o in &outputs {
        let status = o.status.map_or("-", |s| s.as_str());
        let detail = o.result.detail.as_deref().map(|d| format!("  {d}")).unwrap_or_default();
        println!(
            "{}#{}  {}  {}  tokens={} rollbacks={}{}",
            o.task_id,
            o.sample_index,
            o.result.outcome.as_str(),
            status,
            o.result.trace.totals.tokens,
            o.result.trace.totals.rollbacks,
            detail
        );
    }
    let code = if outputs.iter().any(|o| o.is_failure()) { EXIT_PARTIAL } else { 0 };
    let mut summary = outcome_summary(&outputs);
    summary["exit_code"] = code.into();
    manifest.finish(&cfg.out_dir, summary)?;
    Ok(code)
}
