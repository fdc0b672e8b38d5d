use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{GeneratorError, TokenId};

/// Multiplicative first-position factors, one per token, each in `(0, 1]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BiasMap {
    entries: BTreeMap<TokenId, f64>,
}

impl BiasMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Multiplies the token's factor by `factor`; repeated penalties compound.
    pub fn penalize(&mut self, token: TokenId, factor: f64) -> Result<(), GeneratorError> {
        if !(factor > 0.0 && factor <= 1.0) {
            return Err(GeneratorError::InvalidParameter(format!("bias factor {factor} outside (0, 1]")));
        }
        *self.entries.entry(token).or_insert(1.0) *= factor;
        Ok(())
    }

    pub fn factor(&self, token: TokenId) -> f64 {
        self.entries.get(&token).copied().unwrap_or(1.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (TokenId, f64)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    /// Additive logit biases `ln f`. Under softmax sampling, adding `ln f` to a
    /// logit scales that token's unnormalized mass by exactly `f`.
    pub fn to_logit_bias(&self) -> BTreeMap<TokenId, f64> {
        self.entries.iter().map(|(k, f)| (*k, f.ln())).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn penalties_compound() {
        let mut b = BiasMap::new();
        b.penalize(TokenId(3), 0.8).unwrap();
        b.penalize(TokenId(3), 0.8).unwrap();
        assert!((b.factor(TokenId(3)) - 0.64).abs() < 1e-15);
        assert_eq!(b.factor(TokenId(4)), 1.0);
        assert_eq!(b.len(), 1);
    }

    #[test]
    fn logit_bias_is_log_factor() {
        let mut b = BiasMap::new();
        b.penalize(TokenId(1), 0.5).unwrap();
        let lb = b.to_logit_bias();
        assert!((lb[&TokenId(1)] - 0.5f64.ln()).abs() < 1e-15);
        assert_eq!(serde_json::to_string(&lb).unwrap(), format!("{{\"1\":{}}}", 0.5f64.ln()));
    }

    #[test]
    fn rejects_bad_factors() {
        let mut b = BiasMap::new();
        assert!(b.penalize(TokenId(0), 0.0).is_err());
        assert!(b.penalize(TokenId(0), 1.2).is_err());
        assert!(b.is_empty());
    }
}
