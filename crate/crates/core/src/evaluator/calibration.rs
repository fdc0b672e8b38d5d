use serde::{Deserialize, Serialize};

use super::{classify, Decision, Evaluator, EvaluatorError, EvaluatorRequest};
use crate::corpus::{FragmentSample, Label};
use crate::par::map_ordered;

/// Scores are clamped to `[ε, 1 − ε]` before taking logs.
pub const BCE_EPSILON: f64 = 1e-7;

/// Mean binary cross-entropy of `scores` against 0/1 `labels`.
pub fn bce_loss(labels: &[u8], scores: &[f64]) -> Result<f64, EvaluatorError> {
    if labels.len() != scores.len() {
        return Err(EvaluatorError::InvalidRequest(format!(
            "{} labels but {} scores",
            labels.len(),
            scores.len()
        )));
    }
    if labels.is_empty() {
        return Err(EvaluatorError::InvalidRequest("bce_loss needs at least one sample".into()));
    }
    let mut sum = 0.0;
    for (&y, &p) in labels.iter().zip(scores) {
        if y > 1 {
            return Err(EvaluatorError::InvalidRequest(format!("label {y} is not 0 or 1")));
        }
        let p = p.clamp(BCE_EPSILON, 1.0 - BCE_EPSILON);
        sum += if y == 1 { p.ln() } else { (1.0 - p).ln() };
    }
    Ok(-sum / labels.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub total: usize,
    pub scored: usize,
    pub errors: usize,
    pub true_positive: usize,
    pub true_negative: usize,
    /// Incorrect fragments that were accepted.
    pub false_positive: usize,
    pub false_negative: usize,
    pub accuracy: f64,
    /// `None` when the scored set has no incorrect fragments.
    pub false_positive_rate: Option<f64>,
    /// `None` when the scored set has no correct fragments.
    pub false_negative_rate: Option<f64>,
    pub bce: f64,
}

/// Confusion counts and loss of an evaluator over a labeled corpus. Fragments
/// whose scoring fails are counted in `errors` and left out of every rate.
pub fn fragment_accuracy_report(
    evaluator: &dyn Evaluator,
    corpus: &[FragmentSample],
    threshold: f64,
    jobs: usize,
) -> Result<AccuracyReport, EvaluatorError> {
    if corpus.is_empty() {
        return Err(EvaluatorError::InvalidRequest("corpus is empty".into()));
    }
    let scores = map_ordered(corpus, jobs, |f| {
        EvaluatorRequest::new(f.question.clone(), f.prefix_lines.clone()).and_then(|r| evaluator.score(&r))
    });

    let (mut tp, mut tn, mut fp, mut fneg, mut errors) = (0, 0, 0, 0, 0);
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for (frag, score) in corpus.iter().zip(scores) {
        let Ok(score) = score else {
            errors += 1;
            continue;
        };
        let accepted = classify(score, threshold) == Decision::Accept;
        match (frag.label, accepted) {
            (Label::Correct, true) => tp += 1,
            (Label::Correct, false) => fneg += 1,
            (Label::Incorrect, false) => tn += 1,
            (Label::Incorrect, true) => fp += 1,
        }
        labels.push(u8::from(frag.label));
        values.push(score.value());
    }
    let scored = labels.len();
    if scored == 0 {
        return Err(EvaluatorError::Transport {
            attempts: 0,
            message: format!("all {errors} fragments failed to score"),
        });
    }
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    Ok(AccuracyReport {
        total: corpus.len(),
        scored,
        errors,
        true_positive: tp,
        true_negative: tn,
        false_positive: fp,
        false_negative: fneg,
        accuracy: (tp + tn) as f64 / scored as f64,
        false_positive_rate: ratio(fp, fp + tn),
        false_negative_rate: ratio(fneg, fneg + tp),
        bce: bce_loss(&labels, &values)?,
    })
}
