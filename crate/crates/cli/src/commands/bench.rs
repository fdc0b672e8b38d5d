use std::collections::BTreeMap;
use std::path::Path;

use lineguard_core::guard::GenerationTrace;
use lineguard_core::metrics::{
    cost_report, error_histogram, fpr_csv, fpr_vector, write_results_jsonl, BenchReport, ResultRecord, RollbackOracle,
};

use crate::config::{Overrides, RunConfig};
use crate::error::{CliError, CliResult, EXIT_PARTIAL};
use crate::manifest::{write_file, RunManifest};
use crate::tasks::{load_tasks, session_tasks, TaskSpec};

use super::{outcome_summary, run_policy, SampleOutput};

/// Runs every configured policy over the same tasks and seeds, then writes
/// `results.jsonl`, `report.txt`, `report.json` and per-policy outputs.
pub fn run(config_path: &Path, overrides: &Overrides) -> CliResult<u8> {
    let (cfg, raw) = RunConfig::load(config_path, overrides)?;
    let mut manifest = RunManifest::start("bench compare", cfg.hash());
    manifest.digest(config_path, &raw);
    let tasks_path = cfg.tasks.clone().ok_or_else(|| CliError::config("no tasks file: set \"tasks\" or pass --tasks"))?;
    let runner = cfg.runner.as_ref().ok_or_else(|| CliError::config("bench compare needs a \"runner\""))?;
    runner.preflight().map_err(|e| CliError::config(e.to_string()))?;
    let specs = load_tasks(&tasks_path, &mut manifest)?;
    let sessions = session_tasks(&cfg, &specs, &mut manifest)?;

    let mut records: Vec<ResultRecord> = Vec::new();
    let mut report = BenchReport::default();
    let mut failures = 0;
    let mut per_policy = serde_json::Map::new();
    for policy in cfg.bench_policies() {
        let dir = cfg.out_dir.join(policy.as_str());
        let outputs = run_policy(&cfg, &specs, &sessions, policy, &dir)?;
        failures += outputs.iter().filter(|o| o.is_failure()).count();
        let recs: Vec<ResultRecord> = outputs.iter().filter_map(|o| o.record(policy.as_str())).collect();
        report.errors.insert(policy.as_str().to_string(), error_histogram(&recs));
        let fpr = policy_fpr(&specs, &outputs, cfg.samples).map_err(|e| CliError::config(e.to_string()))?;
        if !fpr.is_empty() {
            write_file(&dir.join("fpr.csv"), fpr_csv(&fpr).as_bytes())?;
            report.fpr.insert(policy.as_str().to_string(), fpr);
        }
        per_policy.insert(policy.as_str().to_string(), outcome_summary(&outputs));
        records.extend(recs);
    }
    if records.is_empty() {
        return Err(CliError::config("no verifiable samples: tasks need tests"));
    }
    report.cost = cost_report(&records).map_err(|e| CliError::config(e.to_string()))?;

    write_file(&cfg.out_dir.join("results.jsonl"), write_results_jsonl(&records).as_bytes())?;
    let text = report.to_text();
    write_file(&cfg.out_dir.join("report.txt"), text.as_bytes())?;
    write_file(&cfg.out_dir.join("report.json"), report.to_json().as_bytes())?;
    print!("{text}");

    let code = if failures > 0 { EXIT_PARTIAL } else { 0 };
    manifest.finish(
        &cfg.out_dir,
        serde_json::json!({ "exit_code": code, "failures": failures, "policies": per_policy }),
    )?;
    Ok(code)
}

/// Rollback false-positive rates for tasks that carry a reference program.
fn policy_fpr(
    specs: &[TaskSpec],
    outputs: &[SampleOutput],
    samples: u32,
) -> Result<Vec<lineguard_core::metrics::TaskFpr>, lineguard_core::metrics::MetricsError> {
    let references: BTreeMap<&str, &Vec<String>> =
        specs.iter().filter_map(|t| Some((t.task_id.as_str(), t.reference.as_ref()?))).collect();
    let mut oracle = RollbackOracle::new();
    let mut audited: Vec<(String, &GenerationTrace)> = Vec::new();
    for o in outputs {
        let Some(reference) = references.get(o.task_id.as_str()) else { continue };
        let id = if samples == 1 { o.task_id.clone() } else { format!("{}#{}", o.task_id, o.sample_index) };
        oracle.judge_against_reference(&id, &o.result.trace, reference);
        audited.push((id, &o.result.trace));
    }
    fpr_vector(audited.iter().map(|(id, t)| (id.as_str(), *t)), &oracle)
}

