use serde::{Deserialize, Serialize};

use super::Split;
use crate::hashing::stable_hash_bytes;

/// Relative split weights; they need not sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    /// Problem-count proportions 437 / 441 / 120.
    fn default() -> Self {
        Self { train: 437.0, validation: 441.0, test: 120.0 }
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<(), String> {
        let all = [self.train, self.validation, self.test];
        if all.iter().any(|r| !r.is_finite() || *r < 0.0) || all.iter().sum::<f64>() <= 0.0 {
            return Err(format!("split ratios must be non-negative with a positive sum: {self:?}"));
        }
        Ok(())
    }
}

/// Split for a problem, as a pure function of its id. Every fragment of one
/// problem lands in the same split.
pub fn assign_split(problem_id: &str, ratios: &SplitRatios) -> Split {
    let total = ratios.train + ratios.validation + ratios.test;
    // 53 high bits give a uniform value in [0, 1).
    let u = (stable_hash_bytes(problem_id.as_bytes()) >> 11) as f64 / (1u64 << 53) as f64;
    let x = u * total;
    if x < ratios.train {
        Split::Train
    } else if x < ratios.train + ratios.validation {
        Split::Validation
    } else {
        Split::Test
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_problem() {
        let r = SplitRatios::default();
        for i in 0..50 {
            let id = format!("p{i:05}");
            assert_eq!(assign_split(&id, &r), assign_split(&id, &r));
        }
    }

    #[test]
    fn degenerate_ratios_route_everything() {
        let only_test = SplitRatios { train: 0.0, validation: 0.0, test: 1.0 };
        assert!((0..20).all(|i| assign_split(&format!("p{i}"), &only_test) == Split::Test));
    }

    #[test]
    fn proportions_roughly_follow_ratios() {
        let r = SplitRatios::default();
        let mut counts = [0usize; 3];
        for i in 0..20_000 {
            let s = assign_split(&format!("problem-{i}"), &r);
            counts[s as usize] += 1;
        }
        let frac = |c: usize| c as f64 / 20_000.0;
        assert!((frac(counts[0]) - 437.0 / 998.0).abs() < 0.02);
        assert!((frac(counts[1]) - 441.0 / 998.0).abs() < 0.02);
        assert!((frac(counts[2]) - 120.0 / 998.0).abs() < 0.02);
    }

    #[test]
    fn rejects_bad_ratios() {
        assert!(SplitRatios { train: -1.0, validation: 1.0, test: 1.0 }.validate().is_err());
        assert!(SplitRatios { train: 0.0, validation: 0.0, test: 0.0 }.validate().is_err());
    }
}
