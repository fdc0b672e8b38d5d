use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Evaluator, EvaluatorError, EvaluatorRequest, EvaluatorScore};
use crate::corpus::normalize_lines;

/// On-disk form: `{"entries": {prefix_text: score}, "default": score}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedTable {
    #[serde(default)]
    pub entries: BTreeMap<String, f64>,
    pub default: f64,
}

/// Canonical key for a prefix: normalized lines joined with LF.
pub fn prefix_key<S: AsRef<str>>(lines: &[S]) -> String {
    let joined: Vec<&str> = lines.iter().map(|l| l.as_ref()).collect();
    normalize_lines(&joined.join("\n")).join("\n")
}

/// Deterministic table-driven evaluator. Looks up the prefix text only; the
/// question is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptedEvaluator {
    entries: HashMap<String, EvaluatorScore>,
    default: EvaluatorScore,
}

impl ScriptedEvaluator {
    pub fn constant(score: f64) -> Result<Self, EvaluatorError> {
        Self::from_table(ScriptedTable { entries: BTreeMap::new(), default: score })
    }

    pub fn from_table(table: ScriptedTable) -> Result<Self, EvaluatorError> {
        let bad = |v: f64| EvaluatorError::Table(format!("score {v} outside [0, 1]"));
        let default = EvaluatorScore::new(table.default).map_err(|_| bad(table.default))?;
        let mut entries = HashMap::with_capacity(table.entries.len());
        for (k, v) in table.entries {
            let score = EvaluatorScore::new(v).map_err(|_| bad(v))?;
            let lines = normalize_lines(&k);
            entries.insert(prefix_key(&lines), score);
        }
        Ok(Self { entries, default })
    }

    pub fn load(path: &Path) -> Result<Self, EvaluatorError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| EvaluatorError::Table(format!("{}: {e}", path.display())))?;
        let table: ScriptedTable =
            serde_json::from_str(&text).map_err(|e| EvaluatorError::Table(format!("{}: {e}", path.display())))?;
        Self::from_table(table)
    }

    pub fn insert(&mut self, prefix_lines: &[&str], score: EvaluatorScore) {
        self.entries.insert(prefix_key(prefix_lines), score);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Evaluator for ScriptedEvaluator {
    fn score(&self, request: &EvaluatorRequest) -> Result<EvaluatorScore, EvaluatorError> {
        if request.prefix_lines.is_empty() {
            return Err(EvaluatorError::InvalidRequest("empty prefix".into()));
        }
        Ok(*self.entries.get(&prefix_key(&request.prefix_lines)).unwrap_or(&self.default))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(lines: &[&str]) -> EvaluatorRequest {
        EvaluatorRequest::new("q", lines.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    fn table(json: &str) -> ScriptedEvaluator {
        ScriptedEvaluator::from_table(serde_json::from_str(json).unwrap()).unwrap()
    }

    #[test]
    fn hit_and_default() {
        let ev = table(r#"{"entries": {"s = input()\nfor i in s:": 0.76}, "default": 0.9}"#);
        assert_eq!(ev.score(&req(&["s = input()", "for i in s:"])).unwrap().value(), 0.76);
        assert_eq!(ev.score(&req(&["s = input()", "C = []"])).unwrap().value(), 0.9);
    }

    #[test]
    fn keys_are_whitespace_normalized() {
        let ev = table("{\"entries\": {\"a  \\r\\nb\\n\\n\": 0.1}, \"default\": 0.9}");
        assert_eq!(ev.score(&req(&["a", "b  "])).unwrap().value(), 0.1);
    }

    #[test]
    fn distinct_prefixes_are_independent() {
        let mut ev = ScriptedEvaluator::constant(0.5).unwrap();
        ev.insert(&["ab", "c"], EvaluatorScore::new(0.2).unwrap());
        ev.insert(&["a", "bc"], EvaluatorScore::new(0.8).unwrap());
        assert_ne!(prefix_key(&["ab", "c"]), prefix_key(&["a", "bc"]));
        assert_eq!(ev.score(&req(&["ab", "c"])).unwrap().value(), 0.2);
        assert_eq!(ev.score(&req(&["a", "bc"])).unwrap().value(), 0.8);
        assert_eq!(ev.len(), 2);
    }

    #[test]
    fn question_is_ignored_and_scoring_is_pure() {
        let ev = table(r#"{"entries": {"x": 0.3}, "default": 0.9}"#);
        let a = EvaluatorRequest::new("first question", vec!["x".into()]).unwrap();
        let b = EvaluatorRequest::new("second question", vec!["x".into()]).unwrap();
        assert_eq!(ev.score(&a).unwrap(), ev.score(&b).unwrap());
        assert_eq!(ev.score(&a).unwrap(), ev.score(&a).unwrap());
    }

    #[test]
    fn out_of_range_table_is_rejected() {
        let t: ScriptedTable = serde_json::from_str(r#"{"entries": {"x": 1.3}, "default": 0.9}"#).unwrap();
        assert!(ScriptedEvaluator::from_table(t).is_err());
        assert!(ScriptedEvaluator::constant(-1.0).is_err());
    }
}
