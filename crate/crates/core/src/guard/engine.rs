use serde::{Deserialize, Serialize};

use super::config::{GuardConfig, Policy};
use super::trace::{Clock, EventKind, GenerationTrace, TraceEvent};
use crate::evaluator::{Evaluator, EvaluatorRequest};
use crate::generator::{BiasMap, Generator, LineProposal, ProposalRequest, SamplingParams, TokenId};
use crate::hashing::stable_hash;

/// Lines of EDP history considered at most.
pub const EDP_DEPTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionOutcome {
    Completed,
    BudgetExhausted,
    Failed,
}

impl SessionOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            SessionOutcome::Completed => "completed",
            SessionOutcome::BudgetExhausted => "budget_exhausted",
            SessionOutcome::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionResult {
    pub lines: Vec<String>,
    pub trace: GenerationTrace,
    pub outcome: SessionOutcome,
    /// Error message when the session failed or ran out of budget.
    pub detail: Option<String>,
}

impl SessionResult {
    /// Program text with LF line endings and a trailing newline.
    pub fn code(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        out
    }
}

/// Per-attempt sampling seed: stable across runs, distinct across attempts.
pub fn derive_seed(seed: u64, line_index: usize, attempt_index: u32) -> u64 {
    stable_hash(&[seed, line_index as u64, attempt_index as u64])
}

/// Whether a line carries code worth scoring. Blank and comment-only lines
/// are accepted without consulting the evaluator.
pub fn is_evaluable_line<S: AsRef<str>>(text: &str, comment_prefixes: &[S]) -> bool {
    let body = text.trim();
    !body.is_empty() && !comment_prefixes.iter().any(|p| !p.as_ref().is_empty() && body.starts_with(p.as_ref()))
}

enum Stop {
    Budget(String),
    Failed(String),
}

enum Round {
    Completed,
    Rejected { line: usize, proposal: LineProposal, score: f64 },
}

struct Session<'a> {
    question: &'a str,
    generator: &'a dyn Generator,
    evaluator: &'a dyn Evaluator,
    config: &'a GuardConfig,
    accepted: Vec<String>,
    tokens_used: u64,
    trace: GenerationTrace,
    clock: Clock,
    edp_history: Vec<TokenId>,
}

/// Grows a program line by line under evaluator supervision.
///
/// Line 1 is never scored. Each later evaluable line is appended to the
/// accepted prefix and scored; a score above the threshold accepts it,
/// anything else triggers the configured policy. Line-local policies retry up
/// to `max_resamples` times and then keep the best-scoring attempt, earliest
/// first on ties. The trace records every decision.
pub fn run_guarded(
    question: &str,
    generator: &dyn Generator,
    evaluator: &dyn Evaluator,
    config: &GuardConfig,
) -> SessionResult {
    let mut s = Session {
        question,
        generator,
        evaluator,
        config,
        accepted: Vec::new(),
        tokens_used: 0,
        trace: GenerationTrace::default(),
        clock: Clock::new(config.timing),
        edp_history: Vec::new(),
    };
    let run = match config.validate() {
        Err(e) => Err(Stop::Failed(e.to_string())),
        Ok(()) if config.policy == Policy::FullRestart => s.run_full_restart(),
        Ok(()) => s.run_line_local(),
    };
    let (outcome, detail) = match run {
        Ok(()) => (SessionOutcome::Completed, None),
        Err(Stop::Budget(m)) => (SessionOutcome::BudgetExhausted, Some(m)),
        Err(Stop::Failed(m)) => (SessionOutcome::Failed, Some(m)),
    };
    let kind = if outcome == SessionOutcome::Failed { EventKind::SessionFailed } else { EventKind::SessionDone };
    let mut end = TraceEvent::new(kind, s.accepted.len(), 0);
    end.detail = Some(match &detail {
        Some(m) => format!("{}: {m}", outcome.as_str()),
        None => outcome.as_str().to_string(),
    });
    s.record(end);
    SessionResult { lines: s.accepted, trace: s.trace, outcome, detail }
}

impl Session<'_> {
    fn record(&mut self, mut event: TraceEvent) {
        event.wall_ms = self.clock.lap(event.kind, event.tokens_delta);
        self.trace.push(event);
    }

    fn simple(&mut self, kind: EventKind, line: usize, attempt: u32, score: Option<f64>) {
        let mut e = TraceEvent::new(kind, line, attempt);
        e.score = score;
        self.record(e);
    }

    fn propose(&mut self, line: usize, attempt: u32, bias: &BiasMap) -> Result<LineProposal, Stop> {
        if self.tokens_used >= self.config.max_total_tokens {
            return Err(Stop::Budget(format!("token budget {} reached", self.config.max_total_tokens)));
        }
        let sampling = SamplingParams {
            temperature: self.config.temperature,
            top_p: self.config.top_p,
            seed: derive_seed(self.config.seed, line, attempt),
        };
        let request = ProposalRequest { question: self.question, prefix_lines: &self.accepted, bias, sampling };
        let proposal = self.generator.propose(&request).map_err(|e| Stop::Failed(e.to_string()))?;
        self.tokens_used += u64::from(proposal.token_count);
        let mut e = TraceEvent::new(EventKind::LineProposed, line, attempt);
        e.token_id = proposal.first_content_token;
        e.text = Some(proposal.text.clone());
        e.tokens_delta = u64::from(proposal.token_count);
        if proposal.finished_program {
            e.detail = Some("finished".into());
        }
        self.record(e);
        if !ends_program(&proposal) && line > self.config.max_lines {
            return Err(Stop::Budget(format!("line budget {} reached", self.config.max_lines)));
        }
        Ok(proposal)
    }

    fn score(&mut self, line: usize, attempt: u32, text: &str) -> Result<f64, Stop> {
        let mut prefix = self.accepted.clone();
        prefix.push(text.to_string());
        let request =
            EvaluatorRequest::new(self.question, prefix).map_err(|e| Stop::Failed(e.to_string()))?;
        let score = self.evaluator.score(&request).map_err(|e| Stop::Failed(e.to_string()))?.value();
        self.simple(EventKind::PrefixScored, line, attempt, Some(score));
        Ok(score)
    }

    fn needs_score(&self, line: usize, text: &str) -> bool {
        line >= 2 && is_evaluable_line(text, &self.config.comment_prefixes)
    }

    fn run_line_local(&mut self) -> Result<(), Stop> {
        let n = self.config.max_resamples;
        loop {
            let t = self.accepted.len() + 1;
            let mut bias = BiasMap::new();
            let mut rejected: Vec<(u32, LineProposal, f64)> = Vec::new();
            let mut attempt = 1;
            let kept = loop {
                let p = self.propose(t, attempt, &bias)?;
                if ends_program(&p) {
                    return Ok(());
                }
                if !self.needs_score(t, &p.text) {
                    self.simple(EventKind::LineAccepted, t, attempt, None);
                    break p;
                }
                let score = self.score(t, attempt, &p.text)?;
                if score > self.config.threshold {
                    self.simple(EventKind::LineAccepted, t, attempt, Some(score));
                    break p;
                }
                self.simple(EventKind::Rollback, t, attempt, Some(score));
                rejected.push((attempt, p, score));
                if attempt == n {
                    let (j, best, s) = take_best(rejected);
                    self.simple(EventKind::BestKept, t, j, Some(s));
                    break best;
                }
                let first = rejected.last().and_then(|r| r.1.first_content_token);
                self.apply_policy(t, attempt, first, &mut bias)?;
                attempt += 1;
            };
            self.accepted.push(kept.text);
            if kept.finished_program {
                return Ok(());
            }
        }
    }

    fn apply_policy(&mut self, line: usize, attempt: u32, first: Option<TokenId>, bias: &mut BiasMap) -> Result<(), Stop> {
        let lambda = self.config.lambda;
        let factors: Vec<(TokenId, f64)> = match self.config.policy {
            Policy::Penalty => first.map(|tok| vec![(tok, lambda)]).unwrap_or_default(),
            Policy::Random | Policy::FullRestart => Vec::new(),
            Policy::Edp => {
                self.edp_history.extend(first);
                edp_factors(&self.edp_history, line, lambda)
            }
        };
        for (tok, f) in factors {
            bias.penalize(tok, f).map_err(|e| Stop::Failed(e.to_string()))?;
            let mut e = TraceEvent::new(EventKind::PenaltyApplied, line, attempt);
            e.token_id = Some(tok);
            e.factor = Some(f);
            self.record(e);
        }
        Ok(())
    }

    fn run_full_restart(&mut self) -> Result<(), Stop> {
        let n = self.config.max_resamples;
        let mut best: Option<(u32, usize, Vec<String>, LineProposal, f64)> = None;
        for round in 1..=n {
            self.accepted.clear();
            match self.round(round, true)? {
                Round::Completed => return Ok(()),
                Round::Rejected { line, proposal, score } => {
                    self.simple(EventKind::Rollback, 1, round, Some(score));
                    if best.as_ref().is_none_or(|b| score > b.4) {
                        best = Some((round, line, std::mem::take(&mut self.accepted), proposal, score));
                    }
                }
            }
        }
        let (round, line, prefix, proposal, score) = best.expect("at least one round ran");
        self.accepted = prefix;
        self.simple(EventKind::BestKept, line, round, Some(score));
        self.accepted.push(proposal.text);
        if proposal.finished_program {
            return Ok(());
        }
        match self.round(round, false)? {
            Round::Completed => Ok(()),
            Round::Rejected { .. } => unreachable!("unguarded rounds never reject"),
        }
    }

    /// Generates from the current prefix to the end of the program, using
    /// `round` as the attempt index for every line. Without `guarded` no line
    /// is scored.
    fn round(&mut self, round: u32, guarded: bool) -> Result<Round, Stop> {
        let empty = BiasMap::new();
        loop {
            let t = self.accepted.len() + 1;
            let p = self.propose(t, round, &empty)?;
            if ends_program(&p) {
                return Ok(Round::Completed);
            }
            let mut score = None;
            if guarded && self.needs_score(t, &p.text) {
                let s = self.score(t, round, &p.text)?;
                if s <= self.config.threshold {
                    return Ok(Round::Rejected { line: t, proposal: p, score: s });
                }
                score = Some(s);
            }
            self.simple(EventKind::LineAccepted, t, round, score);
            let finished = p.finished_program;
            self.accepted.push(p.text);
            if finished {
                return Ok(Round::Completed);
            }
        }
    }
}

/// A finished proposal with no text ends the program without adding a line.
fn ends_program(p: &LineProposal) -> bool {
    p.finished_program && p.text.trim().is_empty()
}

/// Highest score wins; the earliest attempt wins ties.
fn take_best(attempts: Vec<(u32, LineProposal, f64)>) -> (u32, LineProposal, f64) {
    let mut best: Option<(u32, LineProposal, f64)> = None;
    for a in attempts {
        if best.as_ref().is_none_or(|b| a.2 > b.2) {
            best = Some(a);
        }
    }
    best.expect("at least one attempt")
}

/// Decaying factors over the most recent rejected first tokens: the newest
/// gets `λ`, the i-th newest `λ^(1/i)`, for at most `min(3, line − 1)` entries.
pub fn edp_factors(history: &[TokenId], line_index: usize, lambda: f64) -> Vec<(TokenId, f64)> {
    let depth = EDP_DEPTH.min(line_index.saturating_sub(1)).min(history.len());
    history.iter().rev().take(depth).enumerate().map(|(i, tok)| (*tok, lambda.powf(1.0 / (i as f64 + 1.0)))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluable_lines() {
        let c = ["#", "//"];
        assert!(!is_evaluable_line("", &c));
        assert!(!is_evaluable_line("   \t", &c));
        assert!(!is_evaluable_line("# init", &c));
        assert!(!is_evaluable_line("    // note", &c));
        assert!(is_evaluable_line("x = 1  # note", &c));
        assert!(is_evaluable_line("# init", &[] as &[&str]));
    }

    #[test]
    fn seeds_differ_per_attempt() {
        assert_eq!(derive_seed(7, 3, 1), derive_seed(7, 3, 1));
        assert_ne!(derive_seed(7, 3, 1), derive_seed(7, 3, 2));
        assert_ne!(derive_seed(7, 3, 1), derive_seed(7, 4, 1));
        assert_ne!(derive_seed(7, 3, 1), derive_seed(8, 3, 1));
    }

    #[test]
    fn best_attempt_selection() {
        let p = |t: &str| LineProposal { text: t.into(), first_content_token: None, token_count: 1, finished_program: false };
        let (j, l, _) = take_best(vec![(1, p("a"), 0.2), (2, p("b"), 0.3), (3, p("c"), 0.25)]);
        assert_eq!((j, l.text.as_str()), (2, "b"));
        let (j, _, _) = take_best(vec![(1, p("a"), 0.3), (2, p("b"), 0.3), (3, p("c"), 0.3)]);
        assert_eq!(j, 1);
    }

    #[test]
    fn edp_factor_schedule() {
        let h = [TokenId(1), TokenId(2)];
        let f = edp_factors(&h, 5, 0.8);
        assert_eq!(f[0], (TokenId(2), 0.8));
        assert_eq!(f[1].0, TokenId(1));
        assert!((f[1].1 - 0.8f64.sqrt()).abs() < 1e-15);
        assert!((f[1].1 - 0.894).abs() < 1e-3);
        assert!(f[0].1 < f[1].1);
        assert_eq!(edp_factors(&h, 2, 0.8), vec![(TokenId(2), 0.8)]);
        assert_eq!(edp_factors(&[TokenId(1); 5], 10, 0.5).len(), 3);
        assert!(edp_factors(&[], 4, 0.8).is_empty());
    }
}
