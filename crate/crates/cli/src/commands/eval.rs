use std::path::{Path, PathBuf};

use lineguard_core::metrics::{pass_at_k_table, read_results, render_table};

use crate::config::canonical;
use crate::error::{CliError, CliResult};
use crate::manifest::{write_file, RunManifest};

/// Prints per-task and mean pass@k and writes `passk.json`.
pub fn passk(results: &Path, k: u64, out_dir: Option<PathBuf>) -> CliResult<u8> {
    let args = serde_json::json!({ "results": results.display().to_string(), "k": k });
    let mut manifest = RunManifest::start("eval passk", lineguard_core::hashing::sha256_hex(canonical(&args).as_bytes()));
    manifest.digest_file(results)?;
    if k == 0 {
        return Err(CliError::config("k must be at least 1"));
    }
    let records = read_results(results).map_err(|e| CliError::config(e.to_string()))?;
    let (rows, means) = pass_at_k_table(&records, k).map_err(|e| CliError::config(e.to_string()))?;

    let mut table = vec![vec!["method".to_string(), "task_id".into(), "n".into(), "c".into(), format!("pass@{k}")]];
    for r in &rows {
        table.push(vec![r.method.clone(), r.task_id.clone(), r.n.to_string(), r.c.to_string(), r.pass_at_k.to_string()]);
    }
    print!("{}", render_table(&table));
    for (method, mean) in &means {
        println!("mean pass@{k} {method} {mean}");
    }

    let out_dir = out_dir.unwrap_or_else(|| results.parent().unwrap_or(Path::new(".")).to_path_buf());
    let body = serde_json::json!({ "k": k, "tasks": rows, "mean": means });
    write_file(&out_dir.join("passk.json"), (serde_json::to_string_pretty(&body).expect("serializes") + "\n").as_bytes())?;
    manifest.finish(&out_dir, serde_json::json!({ "exit_code": 0, "tasks": rows.len() }))?;
    Ok(0)
}
