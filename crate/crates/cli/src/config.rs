//! Run configuration: one JSON file, flags override file values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use lineguard_core::corpus::{RunnerConfig, SplitRatios};
use lineguard_core::evaluator::RemoteEvaluatorConfig;
use lineguard_core::generator::RemoteGeneratorConfig;
use lineguard_core::guard::{GuardConfig, Policy};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Where line proposals come from. Scripted runs read each task's scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Scripted,
    Remote(RemoteGeneratorConfig),
}

/// Where prefix scores come from. `scripted` reads each task's table, or
/// `table` for calibration runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvaluatorSpec {
    Scripted {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table: Option<PathBuf>,
    },
    Constant {
        score: f64,
    },
    Remote(RemoteEvaluatorConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSection {
    pub submissions: PathBuf,
    /// JSON object mapping problem id to `{question, tests}`.
    pub problems: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answers: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ngram: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_ratios: Option<SplitRatios>,
}

fn default_generator() -> GeneratorSpec {
    GeneratorSpec::Scripted
}

fn default_evaluator() -> EvaluatorSpec {
    EvaluatorSpec::Scripted { table: None }
}

fn default_samples() -> u32 {
    1
}

fn default_jobs() -> usize {
    1
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_extension() -> String {
    "py".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub guard: GuardConfig,
    #[serde(default = "default_generator")]
    pub generator: GeneratorSpec,
    #[serde(default = "default_evaluator")]
    pub evaluator: EvaluatorSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runner: Option<RunnerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tasks: Option<PathBuf>,
    /// Policies compared by `bench compare`; empty means all four.
    #[serde(default)]
    pub policies: Vec<Policy>,
    #[serde(default = "default_samples")]
    pub samples: u32,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_extension")]
    pub code_extension: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<CorpusSection>,
}

/// Flag values that win over the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub policy: Option<Vec<Policy>>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub tasks: Option<PathBuf>,
}

impl RunConfig {
    /// Reads `path`, resolves relative paths against its directory and
    /// applies `overrides`. Flag paths stay relative to the working directory.
    pub fn load(path: &Path, overrides: &Overrides) -> CliResult<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_slice(&bytes).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        cfg.apply(overrides);
        cfg.validate()?;
        Ok((cfg, bytes))
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(t) = self.tasks.as_mut() {
            fix(t);
        }
        fix(&mut self.out_dir);
        if let EvaluatorSpec::Scripted { table: Some(t) } = &mut self.evaluator {
            fix(t);
        }
        if let Some(c) = self.corpus.as_mut() {
            fix(&mut c.submissions);
            fix(&mut c.problems);
            if let Some(a) = c.answers.as_mut() {
                fix(a);
            }
        }
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(p) = &o.policy {
            if let Some(first) = p.first() {
                self.guard.policy = *first;
            }
            self.policies = p.clone();
        }
        if let Some(s) = o.seed {
            self.guard.seed = s;
        }
        if let Some(j) = o.jobs {
            self.jobs = j;
        }
        if let Some(d) = &o.out_dir {
            self.out_dir = d.clone();
        }
        if let Some(t) = &o.tasks {
            self.tasks = Some(t.clone());
        }
    }

    fn validate(&self) -> CliResult<()> {
        self.guard.validate().map_err(|e| CliError::config(e.to_string()))?;
        if self.samples == 0 {
            return Err(CliError::config("samples must be at least 1"));
        }
        if self.code_extension.is_empty() || self.code_extension.contains(['/', '\\', '.']) {
            return Err(CliError::config(format!("invalid code_extension {:?}", self.code_extension)));
        }
        if let EvaluatorSpec::Constant { score } = self.evaluator {
            if !(0.0..=1.0).contains(&score) {
                return Err(CliError::config(format!("constant evaluator score {score} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Policies to compare, in the order given, duplicates removed.
    pub fn bench_policies(&self) -> Vec<Policy> {
        let list = if self.policies.is_empty() { Policy::ALL.to_vec() } else { self.policies.clone() };
        let mut out: Vec<Policy> = Vec::new();
        for p in list {
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out
    }

    /// SHA-256 of the canonical JSON form of the resolved config.
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        lineguard_core::hashing::sha256_hex(canonical(&value).as_bytes())
    }
}

/// JSON with object keys sorted at every level.
pub fn canonical(value: &serde_json::Value) -> String {
    fn sort(v: &serde_json::Value) -> serde_json::Value {
        match v {
            serde_json::Value::Object(m) => {
                let sorted: BTreeMap<&String, serde_json::Value> = m.iter().map(|(k, v)| (k, sort(v))).collect();
                serde_json::to_value(sorted).expect("map serializes")
            }
            serde_json::Value::Array(a) => serde_json::Value::Array(a.iter().map(sort).collect()),
            other => other.clone(),
        }
    }
    serde_json::to_string(&sort(value)).expect("value serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_an_empty_config() {
        let cfg: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg.guard, GuardConfig::default());
        assert_eq!(cfg.generator, GeneratorSpec::Scripted);
        assert_eq!(cfg.samples, 1);
        assert_eq!(cfg.bench_policies(), Policy::ALL.to_vec());
    }

    #[test]
    fn flags_win_over_file_values() {
        let mut cfg: RunConfig = serde_json::from_str(r#"{"policy":"edp","seed":4,"jobs":2}"#).unwrap();
        cfg.apply(&Overrides { policy: Some(vec![Policy::Random]), seed: Some(9), ..Default::default() });
        assert_eq!(cfg.guard.policy, Policy::Random);
        assert_eq!(cfg.guard.seed, 9);
        assert_eq!(cfg.jobs, 2);
    }

    #[test]
    fn hash_ignores_key_order() {
        let a: RunConfig = serde_json::from_str(r#"{"seed":1,"lambda":0.7}"#).unwrap();
        let b: RunConfig = serde_json::from_str(r#"{"lambda":0.7,"seed":1}"#).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c: RunConfig = serde_json::from_str(r#"{"lambda":0.7,"seed":2}"#).unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn evaluator_specs_parse() {
        let e: EvaluatorSpec = serde_json::from_str(r#"{"kind":"remote","url":"http://x"}"#).unwrap();
        assert!(matches!(e, EvaluatorSpec::Remote(c) if c.url == "http://x" && c.max_retries == 3));
        let e: EvaluatorSpec = serde_json::from_str(r#"{"kind":"constant","score":0.5}"#).unwrap();
        assert_eq!(e, EvaluatorSpec::Constant { score: 0.5 });
    }
}
