//! Line-proposing generator contract and sampling math.
//!
//! A generator proposes one line at a time given the accepted prefix and a
//! [`BiasMap`] that attenuates candidate first tokens. The pure distribution
//! helpers in [`distribution`] implement the penalty renormalization and
//! temperature scaling used by both the scripted generator and the analysis
//! tooling.

mod bias;
pub mod distribution;
mod remote;
mod scripted;

pub use bias::BiasMap;
pub use distribution::{apply_temperature, apply_token_penalty, nucleus, TokenDistribution, TokenId};
pub use remote::{RemoteGenerator, RemoteGeneratorConfig};
pub use scripted::{Alternative, Scenario, ScenarioLine, ScriptedGenerator};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneratorError {
    /// Network, timeout, non-2xx status or malformed body. Retriable.
    #[error("generator transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("no alternative for line {line}")]
    NoAlternative { line: usize },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("scenario error: {0}")]
    Scenario(String),
}

/// One proposed line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineProposal {
    /// Line text without the trailing newline.
    pub text: String,
    /// First token after leading whitespace; `None` for blank lines.
    pub first_content_token: Option<TokenId>,
    pub token_count: u32,
    /// The generator has nothing more to emit. `text` may be empty.
    pub finished_program: bool,
}

fn default_temperature() -> f64 {
    0.8
}

fn default_top_p() -> f64 {
    0.95
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    /// `0` selects greedy decoding.
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_top_p")]
    pub top_p: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self { temperature: default_temperature(), top_p: default_top_p(), seed: 0 }
    }
}

impl SamplingParams {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(GeneratorError::InvalidParameter(format!("temperature {} must be >= 0", self.temperature)));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(GeneratorError::InvalidParameter(format!("top_p {} outside (0, 1]", self.top_p)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ProposalRequest<'a> {
    pub question: &'a str,
    pub prefix_lines: &'a [String],
    pub bias: &'a BiasMap,
    pub sampling: SamplingParams,
}

impl ProposalRequest<'_> {
    /// 1-based index of the line being proposed.
    pub fn line_index(&self) -> usize {
        self.prefix_lines.len() + 1
    }
}

pub trait Generator: Send + Sync {
    fn propose(&self, request: &ProposalRequest<'_>) -> Result<LineProposal, GeneratorError>;
}

impl<G: Generator + ?Sized> Generator for Box<G> {
    fn propose(&self, request: &ProposalRequest<'_>) -> Result<LineProposal, GeneratorError> {
        (**self).propose(request)
    }
}

impl<G: Generator + ?Sized> Generator for std::sync::Arc<G> {
    fn propose(&self, request: &ProposalRequest<'_>) -> Result<LineProposal, GeneratorError> {
        (**self).propose(request)
    }
}

/// Convenience wrapper matching the request fields one by one.
pub fn propose_line(
    client: &dyn Generator,
    question: &str,
    prefix_lines: &[String],
    bias: &BiasMap,
    sampling: SamplingParams,
) -> Result<LineProposal, GeneratorError> {
    client.propose(&ProposalRequest { question, prefix_lines, bias, sampling })
}
