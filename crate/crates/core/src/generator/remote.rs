use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Generator, GeneratorError, LineProposal, ProposalRequest, TokenId};

fn default_timeout_ms() -> u64 {
    60_000
}

fn default_retries() -> u32 {
    3
}

fn default_backoff_ms() -> u64 {
    100
}

fn default_token_env() -> String {
    "LINEGUARD_GENERATOR_TOKEN".into()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemoteGeneratorConfig {
    /// Base URL; requests go to `{url}/v1/propose`.
    pub url: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
    #[serde(default = "default_token_env")]
    pub token_env: String,
}

impl RemoteGeneratorConfig {
    pub fn new(url: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            timeout_ms: default_timeout_ms(),
            max_retries: default_retries(),
            backoff_ms: default_backoff_ms(),
            token_env: default_token_env(),
        }
    }
}

#[derive(Serialize)]
struct ProposeBody<'a> {
    question: &'a str,
    prefix: String,
    logit_bias: BTreeMap<TokenId, f64>,
    stop: &'static str,
    temperature: f64,
    top_p: f64,
    seed: u64,
}

#[derive(Deserialize)]
struct ProposeReply {
    line: String,
    first_token_id: Option<TokenId>,
    token_count: u32,
    finished: bool,
}

/// HTTP client for `POST /v1/propose`.
///
/// Bias factors travel as additive logit biases `ln f` for the first sampled
/// position of the line; generation stops at LF.
pub struct RemoteGenerator {
    config: RemoteGeneratorConfig,
    endpoint: String,
    token: Option<String>,
    client: reqwest::blocking::Client,
}

impl RemoteGenerator {
    pub fn new(config: RemoteGeneratorConfig) -> Result<Self, GeneratorError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| GeneratorError::Transport { attempts: 0, message: e.to_string() })?;
        let endpoint = format!("{}/v1/propose", config.url.trim_end_matches('/'));
        let token = std::env::var(&config.token_env).ok();
        Ok(Self { config, endpoint, token, client })
    }

    fn try_once(&self, request: &ProposalRequest<'_>) -> Result<LineProposal, String> {
        let body = ProposeBody {
            question: request.question,
            prefix: request.prefix_lines.join("\n"),
            logit_bias: request.bias.to_logit_bias(),
            stop: "\n",
            temperature: request.sampling.temperature,
            top_p: request.sampling.top_p,
            seed: request.sampling.seed,
        };
        let mut call = self.client.post(&self.endpoint).json(&body);
        if let Some(t) = &self.token {
            call = call.bearer_auth(t);
        }
        let resp = call.send().map_err(|e| e.to_string())?;
        let status = resp.status();
        if !status.is_success() {
            return Err(format!("HTTP {status}"));
        }
        let text = resp.text().map_err(|e| e.to_string())?;
        let reply: ProposeReply = serde_json::from_str(&text).map_err(|e| format!("malformed body: {e}"))?;
        let line = reply.line.trim_end_matches(['\n', '\r']).to_string();
        if line.contains('\n') {
            return Err("malformed body: line contains a newline".into());
        }
        if reply.token_count == 0 && !reply.finished {
            return Err("malformed body: token_count must be positive".into());
        }
        let blank = line.trim().is_empty();
        Ok(LineProposal {
            first_content_token: if blank { None } else { reply.first_token_id },
            text: line,
            token_count: reply.token_count,
            finished_program: reply.finished,
        })
    }
}

impl Generator for RemoteGenerator {
    fn propose(&self, request: &ProposalRequest<'_>) -> Result<LineProposal, GeneratorError> {
        request.sampling.validate()?;
        let attempts = self.config.max_retries + 1;
        let mut last = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(self.config.backoff_ms << (attempt - 1)));
            }
            match self.try_once(request) {
                Ok(p) => return Ok(p),
                Err(e) => last = e,
            }
        }
        Err(GeneratorError::Transport { attempts, message: last })
    }
}
