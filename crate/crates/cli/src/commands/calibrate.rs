use std::path::Path;

use lineguard_core::corpus::FragmentSample;
use lineguard_core::evaluator::{fragment_accuracy_report, EvaluatorError};

use crate::config::{Overrides, RunConfig};
use crate::error::{CliError, CliResult, EXIT_PARTIAL};
use crate::manifest::{write_file, RunManifest};
use crate::tasks::build_evaluator;

/// Scores every fragment of a corpus file and reports accuracy and loss.
pub fn run(config_path: &Path, corpus: &Path, overrides: &Overrides) -> CliResult<u8> {
    let (cfg, raw) = RunConfig::load(config_path, overrides)?;
    let mut manifest = RunManifest::start("calibrate", cfg.hash());
    manifest.digest(config_path, &raw);
    let text = std::fs::read_to_string(corpus).map_err(|e| CliError::config(format!("{}: {e}", corpus.display())))?;
    manifest.digest(corpus, text.as_bytes());
    let mut fragments: Vec<FragmentSample> = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        fragments.push(
            serde_json::from_str(line).map_err(|e| CliError::config(format!("{}:{}: {e}", corpus.display(), i + 1)))?,
        );
    }
    let evaluator = build_evaluator(&cfg.evaluator, &mut manifest)?;

    let report = match fragment_accuracy_report(evaluator.as_ref(), &fragments, cfg.guard.threshold, cfg.jobs) {
        Ok(r) => r,
        Err(EvaluatorError::Transport { message, .. }) => {
            eprintln!("error: {message}");
            manifest.finish(&cfg.out_dir, serde_json::json!({ "exit_code": EXIT_PARTIAL, "error": message }))?;
            return Ok(EXIT_PARTIAL);
        }
        Err(e) => return Err(CliError::config(e.to_string())),
    };
    let rate = |r: Option<f64>| r.map_or("undefined".to_string(), |v| v.to_string());
    println!("fragments {} scored {} errors {}", report.total, report.scored, report.errors);
    println!("accuracy {}", report.accuracy);
    println!("false_positive_rate {}", rate(report.false_positive_rate));
    println!("false_negative_rate {}", rate(report.false_negative_rate));
    println!("bce {}", report.bce);

    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::io(e.to_string()))? + "\n";
    write_file(&cfg.out_dir.join("calibration.json"), json.as_bytes())?;
    let code = if report.errors > 0 { EXIT_PARTIAL } else { 0 };
    manifest.finish(&cfg.out_dir, serde_json::json!({ "exit_code": code, "errors": report.errors }))?;
    Ok(code)
}
