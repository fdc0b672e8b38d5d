use lineguard_core::corpus::{verify, RunnerConfig, Submission, Verdict, VerifyStatus};
use lineguard_core::evaluator::ScriptedEvaluator;
use lineguard_core::fixtures::{rollback_audit_suite, scripted_guard_config, taxonomy_programs};
use lineguard_core::generator::ScriptedGenerator;
use lineguard_core::guard::{run_guarded, EventKind, Policy, SessionResult};
use lineguard_core::metrics::*;

fn audit_runs() -> Vec<(String, SessionResult, Vec<String>)> {
    rollback_audit_suite()
        .into_iter()
        .map(|t| {
            let g = ScriptedGenerator::new(t.scenario).unwrap();
            let e = ScriptedEvaluator::from_table(t.table).unwrap();
            let r = run_guarded(&t.question, &g, &e, &scripted_guard_config(Policy::Penalty));
            (t.task_id, r, t.reference)
        })
        .collect()
}

#[test]
fn audit_suite_false_positive_rates() {
    let runs = audit_runs();
    let mut oracle = RollbackOracle::new();
    for (id, r, reference) in &runs {
        oracle.judge_against_reference(id, &r.trace, reference);
    }
    let (a, b) = (&runs[0], &runs[1]);
    assert_eq!(a.1.trace.count(EventKind::Rollback), 4);
    assert_eq!(rollback_fpr(&a.1.trace, &oracle, &a.0).unwrap(), Some(0.25));
    assert_eq!(rollback_fpr(&b.1.trace, &oracle, &b.0).unwrap(), None);

    let rows = fpr_vector(runs.iter().map(|(id, r, _)| (id.as_str(), &r.trace)), &oracle).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(fpr_csv(&rows), format!("task_id,rollbacks,fpr\n{},4,0.25\n", a.0));

    // the oracle survives a JSON round trip
    let json = serde_json::to_string(&oracle.entries()).unwrap();
    let back = RollbackOracle::from_entries(serde_json::from_str(&json).unwrap());
    assert_eq!(back, oracle);
}

#[test]
fn uncovered_rollback_is_an_error() {
    let runs = audit_runs();
    let (id, r, reference) = &runs[0];
    let mut oracle = RollbackOracle::new();
    oracle.judge_against_reference(id, &r.trace, reference);
    let partial = RollbackOracle::from_entries(oracle.entries().into_iter().filter(|e| e.rollback_index != 2).collect());
    let err = rollback_fpr(&r.trace, &partial, id).unwrap_err();
    assert!(matches!(err, MetricsError::Uncovered { rollback_index: 2, .. }));
}

#[test]
fn taxonomy_from_real_runs() {
    let (programs, tests) = taxonomy_programs();
    let runner = RunnerConfig::new("python3 {src}", 5_000);
    let mut records = Vec::new();
    for (i, (name, src)) in programs.iter().enumerate() {
        let s = Submission {
            submission_id: name.to_string(),
            problem_id: "p".into(),
            user_id: "u".into(),
            verdict: Verdict::Incorrect,
            source_lines: src.lines().map(String::from).collect(),
        };
        let out = verify(&s, &tests, &runner).unwrap();
        records.push(ResultRecord::new(name, "m", i as u32, out.status, None, None));
    }
    let statuses: Vec<VerifyStatus> = records.iter().map(|r| r.status).collect();
    assert_eq!(statuses, [VerifyStatus::SyntaxError, VerifyStatus::RuntimeError, VerifyStatus::WrongOutput]);
    let h = error_histogram(&records);
    assert_eq!((h.syntax, h.runtime, h.semantic), (1, 1, 1));
}

#[test]
fn timeouts_count_as_runtime_errors() {
    let recs = [ResultRecord::new("t", "m", 0, VerifyStatus::Timeout, None, None)];
    assert_eq!(error_histogram(&recs).runtime, 1);
}

#[test]
fn results_round_trip_and_cost_report() {
    let mut recs = Vec::new();
    for (task, statuses) in [("t1", [true, false]), ("t2", [false, false])] {
        for (i, pass) in statuses.iter().enumerate() {
            let status = if *pass { VerifyStatus::Pass } else { VerifyStatus::WrongOutput };
            recs.push(ResultRecord::new(task, "a", i as u32, status, Some(100), Some(10.0)));
        }
    }
    recs.push(ResultRecord::new("t1", "b", 0, VerifyStatus::Pass, None, None));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.jsonl");
    std::fs::write(&path, write_results_jsonl(&recs)).unwrap();
    let back = read_results(&path).unwrap();
    assert_eq!(back, recs);

    let report = cost_report(&back).unwrap();
    let a = &report.rows[0];
    assert_eq!((a.method.as_str(), a.tasks, a.samples, a.total_tokens), ("a", 2, 4, 400));
    assert!((a.pass_at_1 - 0.25).abs() < 1e-15);
    assert_eq!(a.mean_tokens, 100.0);
    assert_eq!(report.rows[1].excluded, 1);

    // method b has a single sample, so k=2 is refused rather than guessed
    assert!(pass_at_k_table(&back, 2).is_err());
    let only_a: Vec<_> = back.into_iter().filter(|r| r.method == "a").collect();
    let (_, means) = pass_at_k_table(&only_a, 2).unwrap();
    assert!((means["a"] - 0.5).abs() < 1e-15);
}

#[test]
fn malformed_results_report_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.jsonl");
    let good = write_results_jsonl(&[ResultRecord::new("t", "m", 0, VerifyStatus::Pass, None, None)]);
    std::fs::write(&path, format!("{good}{{not json\n")).unwrap();
    assert!(matches!(read_results(&path), Err(MetricsError::Parse { line: 2, .. })));
}
