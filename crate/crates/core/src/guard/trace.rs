use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::TimingMode;
use crate::generator::TokenId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    LineProposed,
    PrefixScored,
    Rollback,
    PenaltyApplied,
    LineAccepted,
    BestKept,
    SessionDone,
    SessionFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub kind: EventKind,
    pub line_index: usize,
    pub attempt_index: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_id: Option<TokenId>,
    /// Multiplicative factor of a `penalty_applied` event.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<f64>,
    /// Proposed text of a `line_proposed` event.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    /// Outcome or error message of a terminal event.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub tokens_delta: u64,
    pub wall_ms: f64,
}

impl TraceEvent {
    pub fn new(kind: EventKind, line_index: usize, attempt_index: u32) -> Self {
        Self {
            kind,
            line_index,
            attempt_index,
            score: None,
            token_id: None,
            factor: None,
            text: None,
            detail: None,
            tokens_delta: 0,
            wall_ms: 0.0,
        }
    }

    /// Equality ignoring `wall_ms`.
    pub fn same_decision(&self, other: &TraceEvent) -> bool {
        TraceEvent { wall_ms: 0.0, ..self.clone() } == TraceEvent { wall_ms: 0.0, ..other.clone() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceTotals {
    pub tokens: u64,
    pub wall_ms: f64,
    pub rollbacks: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerationTrace {
    pub events: Vec<TraceEvent>,
    pub totals: TraceTotals,
}

#[derive(Serialize, Deserialize)]
struct TotalsRecord {
    totals: TraceTotals,
}

#[derive(Debug, thiserror::Error)]
#[error("trace line {line}: {message}")]
pub struct TraceParseError {
    pub line: usize,
    pub message: String,
}

impl GenerationTrace {
    pub fn push(&mut self, event: TraceEvent) {
        self.totals.tokens += event.tokens_delta;
        self.totals.wall_ms += event.wall_ms;
        if event.kind == EventKind::Rollback {
            self.totals.rollbacks += 1;
        }
        self.events.push(event);
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    /// One event per line, then `{"totals": {...}}`.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("trace events serialize"));
            out.push('\n');
        }
        let totals = TotalsRecord { totals: self.totals.clone() };
        out.push_str(&serde_json::to_string(&totals).expect("totals serialize"));
        out.push('\n');
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, TraceParseError> {
        let mut trace = GenerationTrace::default();
        let mut totals = None;
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let err = |m: String| TraceParseError { line: i + 1, message: m };
            if totals.is_some() {
                return Err(err("content after totals record".into()));
            }
            let value: serde_json::Value = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
            if value.get("totals").is_some() {
                let rec: TotalsRecord = serde_json::from_value(value).map_err(|e| err(e.to_string()))?;
                totals = Some(rec.totals);
            } else {
                trace.push(serde_json::from_value(value).map_err(|e| err(e.to_string()))?);
            }
        }
        let totals = totals.ok_or(TraceParseError { line: 0, message: "missing totals record".into() })?;
        if totals.tokens != trace.totals.tokens || totals.rollbacks != trace.totals.rollbacks {
            return Err(TraceParseError { line: 0, message: "totals disagree with events".into() });
        }
        trace.totals = totals;
        Ok(trace)
    }
}

/// Source of per-event `wall_ms`.
pub(crate) enum Clock {
    Monotonic { last: Instant },
    Simulated { ms_per_token: f64, ms_per_score: f64 },
}

impl Clock {
    pub(crate) fn new(mode: TimingMode) -> Self {
        match mode {
            TimingMode::Monotonic => Clock::Monotonic { last: Instant::now() },
            TimingMode::Simulated { ms_per_token, ms_per_score } => Clock::Simulated { ms_per_token, ms_per_score },
        }
    }

    /// Time attributed to an event, measured since the previous one.
    pub(crate) fn lap(&mut self, kind: EventKind, tokens_delta: u64) -> f64 {
        match self {
            Clock::Monotonic { last } => {
                let now = Instant::now();
                let ms = now.duration_since(*last).as_secs_f64() * 1_000.0;
                *last = now;
                ms
            }
            Clock::Simulated { ms_per_token, ms_per_score } => match kind {
                EventKind::LineProposed => *ms_per_token * tokens_delta as f64,
                EventKind::PrefixScored => *ms_per_score,
                _ => 0.0,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GenerationTrace {
        let mut t = GenerationTrace::default();
        let mut p = TraceEvent::new(EventKind::LineProposed, 1, 1);
        p.tokens_delta = 4;
        p.text = Some("x = 1".into());
        t.push(p);
        let mut s = TraceEvent::new(EventKind::PrefixScored, 2, 1);
        s.score = Some(0.25);
        t.push(s.clone());
        s.kind = EventKind::Rollback;
        t.push(s);
        t
    }

    #[test]
    fn totals_track_events() {
        let t = sample();
        assert_eq!(t.totals.tokens, 4);
        assert_eq!(t.totals.rollbacks, 1);
        assert_eq!(t.count(EventKind::PrefixScored), 1);
    }

    #[test]
    fn jsonl_round_trip() {
        let t = sample();
        let text = t.to_jsonl();
        assert!(text.lines().last().unwrap().starts_with("{\"totals\""));
        assert!(text.starts_with(r#"{"kind":"line_proposed","line_index":1,"attempt_index":1,"text":"x = 1","tokens_delta":4"#));
        assert_eq!(GenerationTrace::from_jsonl(&text).unwrap(), t);
    }

    #[test]
    fn rejects_inconsistent_totals() {
        let text = sample().to_jsonl().replace("\"tokens\":4", "\"tokens\":5");
        assert!(GenerationTrace::from_jsonl(&text).is_err());
        assert!(GenerationTrace::from_jsonl("{\"kind\":\"rollback\"}").is_err());
    }

    #[test]
    fn simulated_clock_is_a_pure_cost_model() {
        let mut c = Clock::new(TimingMode::Simulated { ms_per_token: 2.0, ms_per_score: 10.0 });
        assert_eq!(c.lap(EventKind::LineProposed, 5), 10.0);
        assert_eq!(c.lap(EventKind::PrefixScored, 0), 10.0);
        assert_eq!(c.lap(EventKind::Rollback, 0), 0.0);
    }
}
