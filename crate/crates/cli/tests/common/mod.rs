#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lineguard_core::fixtures::{scripted_guard_config, ScriptedTask};
use lineguard_core::guard::Policy;
use serde_json::{json, Value};

pub fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden").join(name)
}

pub fn lineguard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lineguard")).args(args).output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Writes a scenario and table per task plus `tasks.jsonl` into `dir`.
pub fn write_tasks(dir: &Path, tasks: &[ScriptedTask]) -> PathBuf {
    std::fs::create_dir_all(dir.join("scenarios")).unwrap();
    let mut lines = String::new();
    for t in tasks {
        let scenario = format!("scenarios/{}.scenario.json", t.task_id);
        let table = format!("scenarios/{}.table.json", t.task_id);
        std::fs::write(dir.join(&scenario), serde_json::to_string_pretty(&t.scenario).unwrap()).unwrap();
        std::fs::write(dir.join(&table), serde_json::to_string_pretty(&t.table).unwrap()).unwrap();
        let row = json!({
            "task_id": t.task_id,
            "question": t.question,
            "scenario": scenario,
            "evaluator_table": table,
            "tests": t.tests,
            "reference": t.reference,
        });
        lines.push_str(&row.to_string());
        lines.push('\n');
    }
    let path = dir.join("tasks.jsonl");
    std::fs::write(&path, lines).unwrap();
    path
}

/// Scripted run config over `tasks.jsonl` with the python runner; `extra`
/// keys are merged on top.
pub fn write_config(dir: &Path, policy: Policy, extra: Value) -> PathBuf {
    let mut cfg = serde_json::to_value(scripted_guard_config(policy)).unwrap();
    let obj = cfg.as_object_mut().unwrap();
    obj.insert("tasks".into(), json!("tasks.jsonl"));
    obj.insert("runner".into(), json!({ "command_template": "python3 {src}", "timeout_ms": 5000 }));
    obj.insert("out_dir".into(), json!("out"));
    if let Value::Object(extra) = extra {
        for (k, v) in extra {
            obj.insert(k, v);
        }
    }
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

pub fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Every file under `dir`, keyed by relative path; run manifests carry
/// timestamps and are skipped.
pub fn snapshot(dir: &Path) -> std::collections::BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut std::collections::BTreeMap<String, Vec<u8>>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else if !p.file_name().unwrap().to_string_lossy().starts_with("run_manifest.") {
                out.insert(p.strip_prefix(root).unwrap().display().to_string(), std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = std::collections::BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}
