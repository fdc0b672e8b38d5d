use std::collections::BTreeMap;

use lineguard_core::corpus::*;
use lineguard_core::fixtures::{pair_corpus, PairCorpus};

fn config() -> CorpusConfig {
    CorpusConfig::new(RunnerConfig::new("python3 {src}", 5_000))
}

fn build(c: &PairCorpus, jobs: usize) -> CorpusBuild {
    build_corpus(&c.submissions, &c.problems, &c.answers, &config(), jobs).unwrap()
}

fn read_dir(dir: &std::path::Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let e = e.unwrap();
        out.insert(e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap());
    }
    out
}

#[test]
fn twelve_pair_fixture() {
    let c = pair_corpus();
    let b = build(&c, 0);
    let counts = &b.manifest.counts;
    assert_eq!(counts.pairs_retained, 12);
    assert_eq!(counts.single_line_pairs, 9);
    assert_eq!(counts.multi_line_pairs, 3);
    assert_eq!(counts.localized_pairs, 1);
    assert_eq!(counts.pending_prompts, 2);
    assert_eq!(b.fragments.len(), 20);
    assert_eq!(counts.discarded_correct, 1);
    assert_eq!(counts.excluded_erroneous, 1);
    assert_eq!(b.manifest.failures, 0);
    assert_eq!(b.manifest.drops["stats:u6:0"].kind, DropKind::BelowThreshold);

    for p in &b.pairs {
        let j = jaccard(&ngram_set(&p.correct.source_lines, 3), &ngram_set(&p.erroneous.source_lines, 3));
        assert!(j > 0.9, "{} has J={j}", p.pair_id);
        assert_eq!(j, p.jaccard);
    }
    let localized: Vec<_> = b.pairs.iter().filter(|p| p.divergence_source == DivergenceSource::LlmLocalized).collect();
    assert_eq!(localized.len(), 1);
    assert_eq!(localized[0].divergence_line, 16);

    for pair in b.fragments.chunks(2) {
        let (good, bad) = (&pair[0], &pair[1]);
        assert_eq!(good.pair_id, bad.pair_id);
        assert_eq!((good.label, bad.label), (Label::Correct, Label::Incorrect));
        assert_eq!(good.prefix_lines.len(), bad.prefix_lines.len());
        let n = good.prefix_lines.len();
        assert_ne!(good.prefix_lines[n - 1], bad.prefix_lines[n - 1]);
        assert_eq!(good.prefix_lines[..n - 1], bad.prefix_lines[..n - 1]);
    }

    let pending: Vec<&str> = b.pending.iter().map(|p| p.pair_id.as_str()).collect();
    assert_eq!(pending, ["digits:u4:0", "letters:u4:0"]);
    for p in &b.pending {
        assert!(p.prompt_text.contains("[The start of RESPONSE 1]"));
        assert!(p.prompt_text.contains("[The end of RESPONSE 2]"));
    }
}

#[test]
fn build_is_byte_deterministic_across_jobs() {
    let c = pair_corpus();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    write_corpus(&build(&c, 1), a.path()).unwrap();
    write_corpus(&build(&c, 4), b.path()).unwrap();
    let (x, y) = (read_dir(a.path()), read_dir(b.path()));
    assert_eq!(x.keys().collect::<Vec<_>>(), ["manifest.json", "pairs.jsonl", "pending_prompts.jsonl", "test.jsonl", "train.jsonl", "validation.jsonl"]);
    assert_eq!(x, y);
}

#[test]
fn fragment_records_have_exact_fields() {
    let b = build(&pair_corpus(), 0);
    let v = serde_json::to_value(&b.fragments[0]).unwrap();
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(keys, ["label", "pair_id", "prefix_lines", "problem_id", "question", "split"]);
    assert!(v["label"] == 1 || v["label"] == 0);
}

#[test]
fn no_problem_straddles_splits() {
    let b = build(&pair_corpus(), 0);
    let mut seen: BTreeMap<&str, Split> = BTreeMap::new();
    for f in &b.fragments {
        assert_eq!(*seen.entry(&f.problem_id).or_insert(f.split), f.split);
    }
}

#[test]
fn bad_answers_are_recorded_not_fatal() {
    let mut c = pair_corpus();
    c.answers.insert("letters:u4:0".into(), "no idea".into());
    c.answers.insert("digits:u4:0".into(), "line 99".into());
    let b = build(&c, 0);
    assert_eq!(b.manifest.failures, 2);
    assert_eq!(b.manifest.drops["letters:u4:0"].kind, DropKind::InvalidLocalizationAnswer);
    assert!(b.manifest.drops["letters:u4:0"].detail.contains("no idea"));
    assert!(b.pending.is_empty());
}

#[test]
fn missing_runner_is_a_config_error() {
    let c = pair_corpus();
    let cfg = CorpusConfig::new(RunnerConfig::new("definitely-not-a-runner-xyz {src}", 1_000));
    assert!(matches!(build_corpus(&c.submissions, &c.problems, &c.answers, &cfg, 1), Err(CorpusError::Config(_))));
}

#[test]
fn localization_prompt_matches_golden() {
    let c = pair_corpus();
    let b = build(&c, 0);
    let golden = include_str!("golden/localization_prompt.txt");
    let p = b.pending.iter().find(|p| p.pair_id == "letters:u4:0").unwrap();
    assert_eq!(p.prompt_text, golden);
}

#[test]
fn localized_line_past_a_benign_mismatch_keeps_it_in_the_prefix() {
    // line 2 differs harmlessly, line 3 is the fault named by the answer
    let correct = Submission::from_source("c", "p", "u", Verdict::Correct, "a = 1\nb = a * 2\nprint(b)\n").unwrap();
    let erroneous = Submission::from_source("e", "p", "u", Verdict::Incorrect, "a = 1\nb = 2 * a\nprint(a)\n").unwrap();
    let pair = CodePair::from_similar(SimilarPair { correct, erroneous: erroneous.clone(), jaccard: 0.95 }, "p:u:0").unwrap();
    assert_eq!(pair.diff_indices.iter().copied().collect::<Vec<_>>(), [2, 3]);
    let line = ingest_localization_answer("The faulty line is 3.", &erroneous).unwrap();
    let pair = pair.with_divergence(line, DivergenceSource::LlmLocalized).unwrap();
    let (good, bad) = slice_pair(&pair, "q", Split::Train).unwrap();
    assert_eq!(good.prefix_lines, ["a = 1", "b = a * 2", "print(b)"]);
    assert_eq!(bad.prefix_lines, ["a = 1", "b = 2 * a", "print(a)"]);
}
