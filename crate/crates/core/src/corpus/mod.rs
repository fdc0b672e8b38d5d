//! Divergence corpus construction.
//!
//! Submissions are verified in a sandboxed runner, erroneous ones are paired
//! with their most similar correct sibling by n-gram Jaccard similarity, and
//! each retained pair is cut at its first divergent line into two labeled
//! prefix fragments. Pairs that differ on several lines are emitted as
//! localization prompts; the answers are ingested on a later run.

mod build;
mod diff;
mod lines;
mod ngram;
mod pairing;
mod prompt;
mod slice;
mod split;
mod verify;

pub use build::{
    build_corpus, read_answers, read_submissions, write_corpus, CorpusBuild, CorpusConfig,
    DropKind, DropRecord, LocalizationAnswer, Manifest, PendingPrompt, Problem, RawSubmission,
    StageCounts,
};
pub use diff::{diff_indices, first_divergence};
pub use lines::normalize_lines;
pub use ngram::{jaccard, ngram_set, tokenize, NGram};
pub use pairing::{pair_submissions, SimilarPair};
pub use prompt::{emit_localization_prompt, ingest_localization_answer, LocalizationPrompt};
pub use slice::slice_pair;
pub use split::{assign_split, SplitRatios};
pub use verify::{verify, CommandTemplate, RunnerConfig, TestCase, VerifierOutcome, VerifyStatus};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("submission {0} has no source lines")]
    EmptySubmission(String),
    #[error("no divergence: the two programs are identical")]
    NoDivergence,
    #[error("divergence line {line} out of range (limit {limit})")]
    DivergenceOutOfRange { line: usize, limit: usize },
    #[error("localization answer rejected ({reason}): {raw:?}")]
    AnswerRejected { reason: String, raw: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed input: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Correct,
    Incorrect,
    Unknown,
}

/// A program submission as an ordered sequence of normalized lines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submission {
    #[serde(default)]
    pub submission_id: String,
    pub problem_id: String,
    pub user_id: String,
    pub verdict: Verdict,
    pub source_lines: Vec<String>,
}

impl Submission {
    /// Builds a submission from raw text, normalizing line endings.
    pub fn from_source(
        submission_id: impl Into<String>,
        problem_id: impl Into<String>,
        user_id: impl Into<String>,
        verdict: Verdict,
        raw_source: &str,
    ) -> Result<Self, CorpusError> {
        let submission_id = submission_id.into();
        let source_lines = normalize_lines(raw_source);
        if source_lines.is_empty() {
            return Err(CorpusError::EmptySubmission(submission_id));
        }
        Ok(Self {
            submission_id,
            problem_id: problem_id.into(),
            user_id: user_id.into(),
            verdict,
            source_lines,
        })
    }

    /// Source text with LF endings and a trailing newline.
    pub fn source_text(&self) -> String {
        let mut s = self.source_lines.join("\n");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceSource {
    PositionalDiff,
    LlmLocalized,
    Manual,
}

/// A matched correct/erroneous pair with its divergence annotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodePair {
    pub pair_id: String,
    pub correct: Submission,
    pub erroneous: Submission,
    pub jaccard: f64,
    pub diff_indices: BTreeSet<usize>,
    pub divergence_line: usize,
    pub divergence_source: DivergenceSource,
}

impl CodePair {
    /// Pairs two submissions, computing the diff set and taking its minimum
    /// as the divergence line.
    pub fn from_similar(pair: SimilarPair, pair_id: impl Into<String>) -> Result<Self, CorpusError> {
        let diff = diff_indices(&pair.correct.source_lines, &pair.erroneous.source_lines);
        let line = first_divergence(&diff)?;
        let limit = pair.erroneous.source_lines.len();
        if line > limit {
            return Err(CorpusError::DivergenceOutOfRange { line, limit });
        }
        Ok(Self {
            pair_id: pair_id.into(),
            correct: pair.correct,
            erroneous: pair.erroneous,
            jaccard: pair.jaccard,
            diff_indices: diff,
            divergence_line: line,
            divergence_source: DivergenceSource::PositionalDiff,
        })
    }

    /// Replaces the divergence line with an externally localized one.
    pub fn with_divergence(mut self, line: usize, source: DivergenceSource) -> Result<Self, CorpusError> {
        let limit = self.erroneous.source_lines.len();
        if line == 0 || line > limit {
            return Err(CorpusError::DivergenceOutOfRange { line, limit });
        }
        self.divergence_line = line;
        self.divergence_source = source;
        Ok(self)
    }

    pub fn is_multi_line(&self) -> bool {
        self.diff_indices.len() > 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Label {
    Incorrect,
    Correct,
}

impl From<Label> for u8 {
    fn from(l: Label) -> u8 {
        match l {
            Label::Incorrect => 0,
            Label::Correct => 1,
        }
    }
}

impl TryFrom<u8> for Label {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            0 => Ok(Label::Incorrect),
            1 => Ok(Label::Correct),
            other => Err(format!("label must be 0 or 1, got {other}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

/// One labeled code prefix. Field order is the on-disk JSONL order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentSample {
    pub problem_id: String,
    pub question: String,
    pub prefix_lines: Vec<String>,
    pub label: Label,
    pub pair_id: String,
    pub split: Split,
}
