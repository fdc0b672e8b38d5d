use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::distribution::{apply_temperature, nucleus};
use super::{Generator, GeneratorError, LineProposal, ProposalRequest, TokenId};
use crate::corpus::tokenize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alternative {
    pub text: String,
    /// Id of the first non-whitespace token; blank lines carry none.
    #[serde(default)]
    pub first_token: Option<TokenId>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioLine {
    pub alternatives: Vec<Alternative>,
}

/// Candidate lines per position. Line `end_after + 1` is the end of program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub lines: Vec<ScenarioLine>,
    pub end_after: usize,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        for (i, line) in self.lines.iter().enumerate() {
            for alt in &line.alternatives {
                if !(alt.weight.is_finite() && alt.weight >= 0.0) {
                    return Err(GeneratorError::Scenario(format!("line {}: weight {} is invalid", i + 1, alt.weight)));
                }
                if alt.text.contains('\n') {
                    return Err(GeneratorError::Scenario(format!("line {}: alternative contains a newline", i + 1)));
                }
            }
        }
        Ok(())
    }

    /// The unbiased greedy program: heaviest alternative per line.
    pub fn greedy_program(&self) -> Vec<String> {
        self.lines
            .iter()
            .take(self.end_after)
            .filter_map(|l| {
                let w: Vec<f64> = l.alternatives.iter().map(|a| a.weight).collect();
                argmax(&w).map(|i| l.alternatives[i].text.clone())
            })
            .collect()
    }
}

/// Deterministic test double driven by a [`Scenario`].
///
/// Each alternative's weight is multiplied by the bias factor of its first
/// token and the result renormalized. This equals applying the token-level
/// penalty to the first-position distribution, since all alternatives
/// sharing a first token are scaled together. Temperature and top-p then act
/// on the alternative distribution and a ChaCha8 stream seeded from the
/// request picks one. Temperature `0` is greedy with the earliest alternative
/// winning ties.
#[derive(Debug, Clone)]
pub struct ScriptedGenerator {
    scenario: Scenario,
}

impl ScriptedGenerator {
    pub fn new(scenario: Scenario) -> Result<Self, GeneratorError> {
        scenario.validate()?;
        Ok(Self { scenario })
    }

    pub fn load(path: &Path) -> Result<Self, GeneratorError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GeneratorError::Scenario(format!("{}: {e}", path.display())))?;
        let scenario = serde_json::from_str(&text)
            .map_err(|e| GeneratorError::Scenario(format!("{}: {e}", path.display())))?;
        Self::new(scenario)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Probability of each alternative at `line` (1-based) under `bias`,
    /// before temperature and nucleus truncation.
    pub fn alternative_probs(&self, line: usize, bias: &super::BiasMap) -> Result<Vec<f64>, GeneratorError> {
        let alts = self.alternatives(line)?;
        let eff: Vec<f64> = alts.iter().map(|a| a.weight * factor_of(a, bias)).collect();
        let z: f64 = eff.iter().sum();
        if z.is_nan() || z <= 0.0 {
            return Err(GeneratorError::NoAlternative { line });
        }
        Ok(eff.into_iter().map(|w| w / z).collect())
    }

    fn alternatives(&self, line: usize) -> Result<&[Alternative], GeneratorError> {
        match self.scenario.lines.get(line.wrapping_sub(1)) {
            Some(l) if !l.alternatives.is_empty() => Ok(&l.alternatives),
            _ => Err(GeneratorError::NoAlternative { line }),
        }
    }
}

fn factor_of(alt: &Alternative, bias: &super::BiasMap) -> f64 {
    match alt.first_token {
        Some(t) if !alt.text.trim().is_empty() => bias.factor(t),
        _ => 1.0,
    }
}

fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        if best.is_none_or(|b| *v > values[b]) {
            best = Some(i);
        }
    }
    best
}

impl Generator for ScriptedGenerator {
    fn propose(&self, request: &ProposalRequest<'_>) -> Result<LineProposal, GeneratorError> {
        request.sampling.validate()?;
        let line = request.line_index();
        if line > self.scenario.end_after {
            return Ok(LineProposal { text: String::new(), first_content_token: None, token_count: 1, finished_program: true });
        }
        let alts = self.alternatives(line)?;
        let probs = self.alternative_probs(line, request.bias)?;
        let chosen = if request.sampling.temperature == 0.0 {
            argmax(&probs).ok_or(GeneratorError::NoAlternative { line })?
        } else {
            let logp: Vec<(TokenId, f64)> =
                probs.iter().enumerate().map(|(i, p)| (TokenId(i as u32), p.ln())).collect();
            let tempered = apply_temperature(&logp, request.sampling.temperature)?;
            let kept = nucleus(&tempered, request.sampling.top_p)?;
            let mut rng = ChaCha8Rng::seed_from_u64(request.sampling.seed);
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut pick = kept.probs().last().map(|(id, _)| id.0 as usize).unwrap_or(0);
            for &(id, p) in kept.probs() {
                acc += p;
                if u < acc {
                    pick = id.0 as usize;
                    break;
                }
            }
            pick
        };
        let alt = &alts[chosen];
        let blank = alt.text.trim().is_empty();
        Ok(LineProposal {
            text: alt.text.clone(),
            first_content_token: if blank { None } else { alt.first_token },
            token_count: tokenize(&alt.text).len() as u32 + 1,
            finished_program: false,
        })
    }
}
