//! Next-token distribution arithmetic: penalty renormalization, temperature
//! scaling and nucleus truncation.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::GeneratorError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenId(pub u32);

impl std::fmt::Display for TokenId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Tolerance on `Σp = 1`.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A probability distribution over distinct tokens, in caller order.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenDistribution {
    probs: Vec<(TokenId, f64)>,
}

impl TokenDistribution {
    pub fn new(probs: Vec<(TokenId, f64)>) -> Result<Self, GeneratorError> {
        let mut seen = HashSet::with_capacity(probs.len());
        for &(id, p) in &probs {
            if !p.is_finite() || p < 0.0 {
                return Err(GeneratorError::InvalidDistribution(format!("token {id} has probability {p}")));
            }
            if !seen.insert(id) {
                return Err(GeneratorError::InvalidDistribution(format!("token {id} appears twice")));
            }
        }
        let sum: f64 = probs.iter().map(|(_, p)| p).sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(GeneratorError::InvalidDistribution(format!("probabilities sum to {sum}")));
        }
        Ok(Self { probs })
    }

    /// Normalizes non-negative weights.
    pub fn from_weights(weights: Vec<(TokenId, f64)>) -> Result<Self, GeneratorError> {
        let sum: f64 = weights.iter().map(|(_, w)| w).sum();
        if !(sum.is_finite() && sum > 0.0) {
            return Err(GeneratorError::InvalidDistribution(format!("weights sum to {sum}")));
        }
        Self::new(weights.into_iter().map(|(id, w)| (id, w / sum)).collect())
    }

    pub fn probs(&self) -> &[(TokenId, f64)] {
        &self.probs
    }

    pub fn prob(&self, id: TokenId) -> Option<f64> {
        self.probs.iter().find(|(t, _)| *t == id).map(|(_, p)| *p)
    }

    /// Most probable token; the earliest wins ties.
    pub fn argmax(&self) -> Option<TokenId> {
        let mut best: Option<(TokenId, f64)> = None;
        for &(id, p) in &self.probs {
            if best.is_none_or(|(_, bp)| p > bp) {
                best = Some((id, p));
            }
        }
        best.map(|(id, _)| id)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Scales token `k` by `lambda` and renormalizes the whole distribution.
///
/// The penalized mass becomes `λ·p_k / (1 − (1 − λ)·p_k)`; every other token
/// is divided by the same normalizer, so their pairwise ratios are unchanged.
pub fn apply_token_penalty(
    dist: &TokenDistribution,
    k: TokenId,
    lambda: f64,
) -> Result<TokenDistribution, GeneratorError> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(GeneratorError::InvalidParameter(format!("lambda {lambda} outside (0, 1)")));
    }
    if dist.prob(k).is_none() {
        return Err(GeneratorError::InvalidParameter(format!("token {k} not in distribution")));
    }
    let scaled: Vec<(TokenId, f64)> =
        dist.probs.iter().map(|&(id, p)| (id, if id == k { lambda * p } else { p })).collect();
    let z: f64 = scaled.iter().map(|(_, p)| p).sum();
    Ok(TokenDistribution { probs: scaled.into_iter().map(|(id, p)| (id, p / z)).collect() })
}

/// `p'(w) ∝ exp(log p(w) / T)`. Entries with `log p = −∞` get zero mass.
pub fn apply_temperature(logprobs: &[(TokenId, f64)], temperature: f64) -> Result<TokenDistribution, GeneratorError> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(GeneratorError::InvalidParameter(format!("temperature {temperature} must be positive")));
    }
    let max = logprobs.iter().map(|(_, lp)| *lp).fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(GeneratorError::InvalidDistribution("no finite log-probability".into()));
    }
    let weights: Vec<(TokenId, f64)> =
        logprobs.iter().map(|&(id, lp)| (id, ((lp - max) / temperature).exp())).collect();
    TokenDistribution::from_weights(weights)
}

/// Keeps the smallest most-probable set whose mass reaches `top_p` and
/// renormalizes it. Ties in probability keep caller order.
pub fn nucleus(dist: &TokenDistribution, top_p: f64) -> Result<TokenDistribution, GeneratorError> {
    if !(top_p > 0.0 && top_p <= 1.0) {
        return Err(GeneratorError::InvalidParameter(format!("top_p {top_p} outside (0, 1]")));
    }
    let mut order: Vec<usize> = (0..dist.probs.len()).collect();
    order.sort_by(|&a, &b| dist.probs[b].1.total_cmp(&dist.probs[a].1));
    let mut kept = Vec::new();
    let mut mass = 0.0;
    for i in order {
        let (id, p) = dist.probs[i];
        if p <= 0.0 {
            break;
        }
        kept.push((id, p));
        mass += p;
        if mass >= top_p {
            break;
        }
    }
    TokenDistribution::from_weights(kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const A: TokenId = TokenId(0);
    const B: TokenId = TokenId(1);
    const C: TokenId = TokenId(2);

    fn abc() -> TokenDistribution {
        TokenDistribution::new(vec![(A, 0.5), (B, 0.3), (C, 0.2)]).unwrap()
    }

    #[test]
    fn penalty_worked_example() {
        let out = apply_token_penalty(&abc(), A, 0.8).unwrap();
        let want = [4.0 / 9.0, 3.0 / 9.0, 2.0 / 9.0];
        for ((_, got), w) in out.probs().iter().zip(want) {
            assert!((got - w).abs() < 1e-15, "{got} vs {w}");
        }
    }

    #[test]
    fn penalty_near_one_is_near_identity() {
        let out = apply_token_penalty(&abc(), B, 0.999999).unwrap();
        for ((_, a), (_, b)) in out.probs().iter().zip(abc().probs()) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn point_mass_is_unchanged() {
        let d = TokenDistribution::new(vec![(A, 1.0), (B, 0.0)]).unwrap();
        let out = apply_token_penalty(&d, A, 0.3).unwrap();
        assert_eq!(out.probs(), d.probs());
    }

    #[test]
    fn penalty_errors() {
        assert!(apply_token_penalty(&abc(), TokenId(9), 0.8).is_err());
        for bad in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(apply_token_penalty(&abc(), A, bad).is_err());
        }
    }

    #[test]
    fn stacked_penalties_equal_their_product() {
        let twice = apply_token_penalty(&apply_token_penalty(&abc(), A, 0.8).unwrap(), A, 0.8).unwrap();
        let once = apply_token_penalty(&abc(), A, 0.64).unwrap();
        for ((_, x), (_, y)) in twice.probs().iter().zip(once.probs()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn temperature_identity_sharpen_and_flatten() {
        let lp = [(A, 0.6f64.ln()), (B, 0.4f64.ln())];
        let same = apply_temperature(&lp, 1.0).unwrap();
        assert!((same.prob(A).unwrap() - 0.6).abs() < 1e-12);
        let cold = apply_temperature(&lp, 0.01).unwrap();
        assert!(cold.prob(A).unwrap() > 0.9999);
        let warm = apply_temperature(&[(A, 0.8f64.ln()), (B, 0.2f64.ln())], 2.0).unwrap();
        let want = 0.8f64.sqrt() / (0.8f64.sqrt() + 0.2f64.sqrt());
        assert!((warm.prob(A).unwrap() - want).abs() < 1e-12);
        assert!((want - 0.6667).abs() < 1e-4);
    }

    #[test]
    fn temperature_rejects_non_positive() {
        assert!(apply_temperature(&[(A, 0.0)], 0.0).is_err());
        assert!(apply_temperature(&[(A, 0.0)], -1.0).is_err());
    }

    #[test]
    fn nucleus_keeps_smallest_covering_set() {
        let n = nucleus(&abc(), 0.75).unwrap();
        assert_eq!(n.len(), 2);
        assert!((n.prob(A).unwrap() - 0.625).abs() < 1e-12);
        assert_eq!(nucleus(&abc(), 1.0).unwrap().len(), 3);
        assert_eq!(nucleus(&abc(), 0.1).unwrap().len(), 1);
    }

    #[test]
    fn distribution_validation() {
        assert!(TokenDistribution::new(vec![(A, 0.5), (A, 0.5)]).is_err());
        assert!(TokenDistribution::new(vec![(A, 0.5), (B, 0.4)]).is_err());
        assert!(TokenDistribution::new(vec![(A, 1.5), (B, -0.5)]).is_err());
        assert_eq!(abc().argmax(), Some(A));
    }

    fn dist_strategy() -> impl Strategy<Value = TokenDistribution> {
        prop::collection::vec(0.001f64..1.0, 2..40).prop_map(|w| {
            TokenDistribution::from_weights(w.into_iter().enumerate().map(|(i, x)| (TokenId(i as u32), x)).collect())
                .unwrap()
        })
    }

    proptest! {
        #[test]
        fn penalty_properties(d in dist_strategy(), pick in any::<prop::sample::Index>(), lambda in 0.01f64..0.99) {
            let k = d.probs()[pick.index(d.len())].0;
            let pk = d.prob(k).unwrap();
            let out = apply_token_penalty(&d, k, lambda).unwrap();
            let sum: f64 = out.probs().iter().map(|(_, p)| p).sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
            let closed = lambda * pk / (1.0 - (1.0 - lambda) * pk);
            prop_assert!((out.prob(k).unwrap() - closed).abs() < 1e-12);
            prop_assert!(out.prob(k).unwrap() < pk);
        }

        #[test]
        fn penalties_commute(d in dist_strategy(), i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>(),
                             l1 in 0.05f64..0.95, l2 in 0.05f64..0.95) {
            let k1 = d.probs()[i.index(d.len())].0;
            let k2 = d.probs()[j.index(d.len())].0;
            prop_assume!(k1 != k2);
            let ab = apply_token_penalty(&apply_token_penalty(&d, k1, l1).unwrap(), k2, l2).unwrap();
            let ba = apply_token_penalty(&apply_token_penalty(&d, k2, l2).unwrap(), k1, l1).unwrap();
            for ((_, x), (_, y)) in ab.probs().iter().zip(ba.probs()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn temperature_preserves_argmax(d in dist_strategy(), t in 0.05f64..10.0) {
            let lp: Vec<_> = d.probs().iter().map(|&(id, p)| (id, p.ln())).collect();
            let out = apply_temperature(&lp, t).unwrap();
            let top = d.argmax().unwrap();
            let max_p = out.prob(top).unwrap();
            prop_assert!(out.probs().iter().all(|(_, p)| *p <= max_p));
        }
    }
}
