//! End-to-end corpus construction: verify, pair, diff, then slice or defer.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::pairing::best_matches;
use super::{
    assign_split, emit_localization_prompt, ingest_localization_answer, slice_pair, verify, CodePair,
    CorpusError, DivergenceSource, FragmentSample, RunnerConfig, SimilarPair, Split, SplitRatios, Submission,
    TestCase, Verdict, VerifyStatus,
};
use crate::par::map_ordered;

/// One line of the submissions input file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawSubmission {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub submission_id: Option<String>,
    pub problem_id: String,
    pub user_id: String,
    pub verdict: Verdict,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    pub question: String,
    pub tests: Vec<TestCase>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalizationAnswer {
    pub pair_id: String,
    pub raw_answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingPrompt {
    pub pair_id: String,
    pub prompt_text: String,
}

fn default_ngram() -> usize {
    3
}

fn default_threshold() -> f64 {
    0.9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub runner: RunnerConfig,
    #[serde(default = "default_ngram")]
    pub ngram: usize,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub split_ratios: SplitRatios,
}

impl CorpusConfig {
    pub fn new(runner: RunnerConfig) -> Self {
        Self { runner, ngram: default_ngram(), threshold: default_threshold(), split_ratios: SplitRatios::default() }
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.ngram == 0 {
            return Err(CorpusError::Config("ngram must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(CorpusError::Config(format!("threshold {} outside [0, 1]", self.threshold)));
        }
        self.split_ratios.validate().map_err(CorpusError::Config)?;
        self.runner.preflight()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropKind {
    EmptySource,
    MissingProblem,
    VerifierError,
    CorrectFailedVerification,
    ErroneousNotSemantic,
    ErroneousPassed,
    UnknownVerdictUnusable,
    NoCorrectCounterpart,
    BelowThreshold,
    IdenticalSources,
    DivergenceOutOfRange,
    InvalidLocalizationAnswer,
}

impl DropKind {
    /// Drops that indicate broken input rather than ordinary filtering.
    pub fn is_failure(self) -> bool {
        matches!(
            self,
            DropKind::EmptySource
                | DropKind::MissingProblem
                | DropKind::VerifierError
                | DropKind::InvalidLocalizationAnswer
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropRecord {
    pub kind: DropKind,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub submissions: usize,
    pub verified_correct: usize,
    pub discarded_correct: usize,
    pub verified_erroneous: usize,
    pub excluded_erroneous: usize,
    pub pairs_considered: usize,
    pub pairs_retained: usize,
    pub single_line_pairs: usize,
    pub multi_line_pairs: usize,
    pub localized_pairs: usize,
    pub pending_prompts: usize,
    pub fragments: usize,
    pub fragments_per_split: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub counts: StageCounts,
    pub failures: usize,
    /// Keyed by pair id, or by submission id for drops before pairing.
    pub drops: BTreeMap<String, DropRecord>,
}

#[derive(Debug, Clone, Default)]
pub struct CorpusBuild {
    pub fragments: Vec<FragmentSample>,
    pub pairs: Vec<CodePair>,
    pub pending: Vec<PendingPrompt>,
    pub manifest: Manifest,
}

impl CorpusBuild {
    fn drop(&mut self, key: String, kind: DropKind, detail: impl Into<String>) {
        if kind.is_failure() {
            self.manifest.failures += 1;
        }
        self.manifest.drops.insert(key, DropRecord { kind, detail: detail.into() });
    }

    fn absorb(&mut self, other: CorpusBuild) {
        let c = &mut self.manifest.counts;
        let o = other.manifest.counts;
        c.pairs_considered += o.pairs_considered;
        c.pairs_retained += o.pairs_retained;
        c.single_line_pairs += o.single_line_pairs;
        c.multi_line_pairs += o.multi_line_pairs;
        c.localized_pairs += o.localized_pairs;
        self.manifest.failures += other.manifest.failures;
        self.manifest.drops.extend(other.manifest.drops);
        self.fragments.extend(other.fragments);
        self.pairs.extend(other.pairs);
        self.pending.extend(other.pending);
    }
}

struct Group<'a> {
    problem: &'a Problem,
    correct: Vec<Submission>,
    erroneous: Vec<Submission>,
}

/// Runs the whole pipeline in memory. Only configuration problems return an
/// error; everything else is recorded in the manifest.
///
/// Verification and per-group pairing run through [`map_ordered`] with `jobs`
/// workers; output order is (problem_id, user_id, pair index) regardless.
pub fn build_corpus(
    raw: &[RawSubmission],
    problems: &BTreeMap<String, Problem>,
    answers: &BTreeMap<String, String>,
    config: &CorpusConfig,
    jobs: usize,
) -> Result<CorpusBuild, CorpusError> {
    config.validate()?;
    let mut out = CorpusBuild::default();
    out.manifest.counts.submissions = raw.len();

    let mut subs = Vec::with_capacity(raw.len());
    for (i, r) in raw.iter().enumerate() {
        let id = r
            .submission_id
            .clone()
            .unwrap_or_else(|| format!("{}/{}/{}", r.problem_id, r.user_id, i));
        match Submission::from_source(id.clone(), &r.problem_id, &r.user_id, r.verdict, &r.source) {
            Ok(s) => match problems.get(&s.problem_id) {
                Some(p) => subs.push((s, p)),
                None => out.drop(id, DropKind::MissingProblem, format!("no tests for problem {}", r.problem_id)),
            },
            Err(_) => out.drop(id, DropKind::EmptySource, "source has no lines"),
        }
    }

    let outcomes = map_ordered(&subs, jobs, |(s, p)| verify(s, &p.tests, &config.runner));

    let mut groups: BTreeMap<(String, String), Group> = BTreeMap::new();
    for ((sub, problem), outcome) in subs.into_iter().zip(outcomes) {
        let status = match outcome {
            Ok(o) => o.status,
            Err(CorpusError::Config(msg)) => return Err(CorpusError::Config(msg)),
            Err(e) => {
                out.drop(sub.submission_id.clone(), DropKind::VerifierError, e.to_string());
                continue;
            }
        };
        let c = &mut out.manifest.counts;
        let to_correct = match (sub.verdict, status) {
            (Verdict::Correct, VerifyStatus::Pass) | (Verdict::Unknown, VerifyStatus::Pass) => true,
            (Verdict::Incorrect, VerifyStatus::WrongOutput) | (Verdict::Unknown, VerifyStatus::WrongOutput) => false,
            (Verdict::Correct, s) => {
                c.discarded_correct += 1;
                out.drop(sub.submission_id.clone(), DropKind::CorrectFailedVerification, s.as_str());
                continue;
            }
            (Verdict::Incorrect, VerifyStatus::Pass) => {
                c.excluded_erroneous += 1;
                out.drop(sub.submission_id.clone(), DropKind::ErroneousPassed, "passes every test");
                continue;
            }
            (Verdict::Incorrect, s) => {
                c.excluded_erroneous += 1;
                out.drop(sub.submission_id.clone(), DropKind::ErroneousNotSemantic, s.as_str());
                continue;
            }
            (Verdict::Unknown, s) => {
                out.drop(sub.submission_id.clone(), DropKind::UnknownVerdictUnusable, s.as_str());
                continue;
            }
        };
        let group = groups
            .entry((sub.problem_id.clone(), sub.user_id.clone()))
            .or_insert_with(|| Group { problem, correct: Vec::new(), erroneous: Vec::new() });
        if to_correct {
            c.verified_correct += 1;
            group.correct.push(sub);
        } else {
            c.verified_erroneous += 1;
            group.erroneous.push(sub);
        }
    }

    let groups: Vec<_> = groups.into_iter().collect();
    let per_group = map_ordered(&groups, jobs, |((problem_id, user_id), g)| {
        process_group(problem_id, user_id, g, answers, config)
    });
    for g in per_group {
        out.absorb(g);
    }

    let counts = &mut out.manifest.counts;
    counts.pending_prompts = out.pending.len();
    counts.fragments = out.fragments.len();
    for split in Split::ALL {
        let n = out.fragments.iter().filter(|f| f.split == split).count();
        counts.fragments_per_split.insert(split.as_str().to_string(), n);
    }
    Ok(out)
}

fn process_group(
    problem_id: &str,
    user_id: &str,
    group: &Group,
    answers: &BTreeMap<String, String>,
    config: &CorpusConfig,
) -> CorpusBuild {
    let mut out = CorpusBuild::default();
    let split = assign_split(problem_id, &config.split_ratios);
    let question = &group.problem.question;
    let matches = best_matches(&group.correct, &group.erroneous, config.ngram);

    for (k, (err, cand)) in group.erroneous.iter().zip(matches).enumerate() {
        let pair_id = format!("{problem_id}:{user_id}:{k}");
        out.manifest.counts.pairs_considered += 1;
        let Some(cand) = cand else {
            out.drop(pair_id, DropKind::NoCorrectCounterpart, err.submission_id.clone());
            continue;
        };
        if cand.jaccard <= config.threshold {
            out.drop(pair_id, DropKind::BelowThreshold, format!("jaccard={:.6}", cand.jaccard));
            continue;
        }
        let similar = SimilarPair {
            correct: group.correct[cand.correct_index].clone(),
            erroneous: err.clone(),
            jaccard: cand.jaccard,
        };
        let pair = match CodePair::from_similar(similar, pair_id.clone()) {
            Ok(p) => p,
            Err(CorpusError::NoDivergence) => {
                out.drop(pair_id, DropKind::IdenticalSources, "programs are line-identical");
                continue;
            }
            Err(e) => {
                out.drop(pair_id, DropKind::DivergenceOutOfRange, e.to_string());
                continue;
            }
        };
        out.manifest.counts.pairs_retained += 1;

        let pair = if pair.is_multi_line() {
            out.manifest.counts.multi_line_pairs += 1;
            let Some(raw) = answers.get(&pair_id) else {
                let prompt = emit_localization_prompt(&pair_id, question, &pair.erroneous, &pair.correct);
                out.pending.push(PendingPrompt { pair_id, prompt_text: prompt.text });
                continue;
            };
            let localized = ingest_localization_answer(raw, &pair.erroneous)
                .and_then(|line| pair.with_divergence(line, DivergenceSource::LlmLocalized));
            match localized {
                Ok(p) => {
                    out.manifest.counts.localized_pairs += 1;
                    p
                }
                Err(e) => {
                    out.drop(pair_id, DropKind::InvalidLocalizationAnswer, e.to_string());
                    continue;
                }
            }
        } else {
            out.manifest.counts.single_line_pairs += 1;
            pair
        };

        match slice_pair(&pair, question, split) {
            Ok((good, bad)) => {
                out.fragments.push(good);
                out.fragments.push(bad);
                out.pairs.push(pair);
            }
            Err(e) => out.drop(pair_id, DropKind::DivergenceOutOfRange, e.to_string()),
        }
    }
    out
}

fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<(), CorpusError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for item in items {
        let line = serde_json::to_string(&item).map_err(|e| CorpusError::Parse(e.to_string()))?;
        writeln!(f, "{line}")?;
    }
    f.flush()?;
    Ok(())
}

/// Writes `{train,validation,test}.jsonl`, `pairs.jsonl`,
/// `pending_prompts.jsonl` and `manifest.json` into `dir`.
pub fn write_corpus(build: &CorpusBuild, dir: &Path) -> Result<(), CorpusError> {
    std::fs::create_dir_all(dir)?;
    for split in Split::ALL {
        let path = dir.join(format!("{}.jsonl", split.as_str()));
        write_jsonl(&path, build.fragments.iter().filter(|f| f.split == split))?;
    }
    write_jsonl(&dir.join("pairs.jsonl"), &build.pairs)?;
    write_jsonl(&dir.join("pending_prompts.jsonl"), &build.pending)?;
    let manifest = serde_json::to_string_pretty(&build.manifest).map_err(|e| CorpusError::Parse(e.to_string()))?;
    std::fs::write(dir.join("manifest.json"), manifest + "\n")?;
    Ok(())
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CorpusError> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| CorpusError::Parse(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub fn read_submissions(path: &Path) -> Result<Vec<RawSubmission>, CorpusError> {
    read_jsonl(path)
}

/// Answers keyed by pair id; a later line for the same pair wins.
pub fn read_answers(path: &Path) -> Result<BTreeMap<String, String>, CorpusError> {
    let rows: Vec<LocalizationAnswer> = read_jsonl(path)?;
    Ok(rows.into_iter().map(|a| (a.pair_id, a.raw_answer)).collect())
}
