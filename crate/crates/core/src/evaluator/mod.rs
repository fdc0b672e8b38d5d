//! Semantic evaluator contract.
//!
//! An evaluator maps a (question, code prefix) pair to a confidence in
//! `[0, 1]` that the prefix is still on a correct trajectory. Transport
//! failures are a separate outcome: an evaluator never invents a score.

mod calibration;
mod remote;
mod scripted;

pub use calibration::{bce_loss, fragment_accuracy_report, AccuracyReport, BCE_EPSILON};
pub use remote::{RemoteEvaluator, RemoteEvaluatorConfig};
pub use scripted::{prefix_key, ScriptedEvaluator, ScriptedTable};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvaluatorError {
    /// Network, timeout, non-2xx status or malformed body. Retriable.
    #[error("evaluator transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("invalid evaluator request: {0}")]
    InvalidRequest(String),
    #[error("evaluator table error: {0}")]
    Table(String),
}

/// A confidence in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct EvaluatorScore(f64);

impl EvaluatorScore {
    pub fn new(value: f64) -> Result<Self, EvaluatorError> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(EvaluatorError::InvalidRequest(format!("score {value} outside [0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for EvaluatorScore {
    type Error = EvaluatorError;

    fn try_from(v: f64) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<EvaluatorScore> for f64 {
    fn from(s: EvaluatorScore) -> f64 {
        s.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluatorRequest {
    pub question: String,
    pub prefix_lines: Vec<String>,
}

impl EvaluatorRequest {
    pub fn new(question: impl Into<String>, prefix_lines: Vec<String>) -> Result<Self, EvaluatorError> {
        if prefix_lines.is_empty() {
            return Err(EvaluatorError::InvalidRequest("prefix must contain at least one line".into()));
        }
        Ok(Self { question: question.into(), prefix_lines })
    }

    /// Prefix lines joined with LF, the wire form.
    pub fn prefix_text(&self) -> String {
        self.prefix_lines.join("\n")
    }
}

pub trait Evaluator: Send + Sync {
    fn score(&self, request: &EvaluatorRequest) -> Result<EvaluatorScore, EvaluatorError>;
}

impl<F> Evaluator for F
where
    F: Fn(&EvaluatorRequest) -> Result<EvaluatorScore, EvaluatorError> + Send + Sync,
{
    fn score(&self, request: &EvaluatorRequest) -> Result<EvaluatorScore, EvaluatorError> {
        self(request)
    }
}

/// Scores the prefix; convenience over [`Evaluator::score`].
pub fn score_fragment(evaluator: &dyn Evaluator, request: &EvaluatorRequest) -> Result<EvaluatorScore, EvaluatorError> {
    evaluator.score(request)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Accept,
    Reject,
}

/// Accept iff the score is strictly above the threshold.
pub fn classify(score: EvaluatorScore, threshold: f64) -> Decision {
    if score.value() > threshold {
        Decision::Accept
    } else {
        Decision::Reject
    }
}
