use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::SamplingParams;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid guard config: {0}")]
pub struct ConfigError(pub String);

/// Backtracking policy applied when a prefix is rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Policy {
    /// Roll back the line, penalize its first token, resample.
    #[serde(rename = "semguard_penalty")]
    Penalty,
    /// Roll back the line and resample without any penalty.
    #[serde(rename = "semguard_random")]
    Random,
    /// Discard the whole program and start over.
    #[serde(rename = "full_restart")]
    FullRestart,
    /// Roll back the line and apply decaying penalties to recently rejected
    /// first tokens.
    #[serde(rename = "edp")]
    Edp,
}

impl Policy {
    pub const ALL: [Policy; 4] = [Policy::Penalty, Policy::Random, Policy::FullRestart, Policy::Edp];

    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Penalty => "semguard_penalty",
            Policy::Random => "semguard_random",
            Policy::FullRestart => "full_restart",
            Policy::Edp => "edp",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Policy::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| ConfigError(format!("unknown policy {s:?}")))
    }
}

/// How `wall_ms` is filled in trace events.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TimingMode {
    /// Elapsed time on a monotonic clock.
    #[default]
    Monotonic,
    /// Fixed synthetic costs, for byte-reproducible traces.
    Simulated { ms_per_token: f64, ms_per_score: f64 },
}

fn d_threshold() -> f64 {
    0.5
}
fn d_lambda() -> f64 {
    0.8
}
fn d_resamples() -> u32 {
    3
}
fn d_policy() -> Policy {
    Policy::Penalty
}
fn d_max_lines() -> usize {
    512
}
fn d_max_tokens() -> u64 {
    16_384
}
fn d_temperature() -> f64 {
    0.8
}
fn d_top_p() -> f64 {
    0.95
}
fn d_comments() -> Vec<String> {
    vec!["#".into(), "//".into()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuardConfig {
    #[serde(default = "d_threshold")]
    pub threshold: f64,
    #[serde(default = "d_lambda")]
    pub lambda: f64,
    /// Proposals per line (and rounds for `full_restart`).
    #[serde(default = "d_resamples")]
    pub max_resamples: u32,
    #[serde(default = "d_policy")]
    pub policy: Policy,
    #[serde(default = "d_max_lines")]
    pub max_lines: usize,
    #[serde(default = "d_max_tokens")]
    pub max_total_tokens: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "d_temperature")]
    pub temperature: f64,
    #[serde(default = "d_top_p")]
    pub top_p: f64,
    #[serde(default = "d_comments")]
    pub comment_prefixes: Vec<String>,
    #[serde(default)]
    pub timing: TimingMode,
}

impl Default for GuardConfig {
    fn default() -> Self {
        Self {
            threshold: d_threshold(),
            lambda: d_lambda(),
            max_resamples: d_resamples(),
            policy: d_policy(),
            max_lines: d_max_lines(),
            max_total_tokens: d_max_tokens(),
            seed: 0,
            temperature: d_temperature(),
            top_p: d_top_p(),
            comment_prefixes: d_comments(),
            timing: TimingMode::Monotonic,
        }
    }
}

impl GuardConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError(m));
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return bad(format!("threshold {} outside (0, 1)", self.threshold));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return bad(format!("lambda {} outside (0, 1)", self.lambda));
        }
        if self.max_resamples == 0 {
            return bad("max_resamples must be at least 1".into());
        }
        if self.max_lines == 0 || self.max_total_tokens == 0 {
            return bad("max_lines and max_total_tokens must be positive".into());
        }
        let sampling = SamplingParams { temperature: self.temperature, top_p: self.top_p, seed: self.seed };
        sampling.validate().map_err(|e| ConfigError(e.to_string()))?;
        if let TimingMode::Simulated { ms_per_token, ms_per_score } = self.timing {
            if !(ms_per_token >= 0.0 && ms_per_score >= 0.0 && ms_per_token.is_finite() && ms_per_score.is_finite()) {
                return bad("simulated timing costs must be finite and non-negative".into());
            }
        }
        Ok(())
    }
}
