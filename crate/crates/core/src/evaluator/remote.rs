use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Evaluator, EvaluatorError, EvaluatorRequest, EvaluatorScore};

fn default_timeout_ms() -> u64 {
    10_000
}

fn default_retries() -> u32 {
    3
}

fn default_backoff_ms() -> u64 {
    100
}

fn default_token_env() -> String {
    "LINEGUARD_EVALUATOR_TOKEN".into()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemoteEvaluatorConfig {
    /// Base URL; requests go to `{url}/v1/score`.
    pub url: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
    /// Environment variable holding an optional bearer token.
    #[serde(default = "default_token_env")]
    pub token_env: String,
}

impl RemoteEvaluatorConfig {
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
struct ScoreBody<'a> {
    question: &'a str,
    prefix: String,
}

#[derive(Deserialize)]
struct ScoreReply {
    score: f64,
}

/// HTTP client for `POST /v1/score`, retrying transport failures with
/// exponential backoff.
pub struct RemoteEvaluator {
    config: RemoteEvaluatorConfig,
    endpoint: String,
    token: Option<String>,
    client: reqwest::blocking::Client,
}

impl RemoteEvaluator {
    pub fn new(config: RemoteEvaluatorConfig) -> Result<Self, EvaluatorError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| EvaluatorError::Transport { attempts: 0, message: e.to_string() })?;
        let endpoint = format!("{}/v1/score", config.url.trim_end_matches('/'));
        let token = std::env::var(&config.token_env).ok();
        Ok(Self { config, endpoint, token, client })
    }

    fn try_once(&self, request: &EvaluatorRequest) -> Result<EvaluatorScore, String> {
        let body = ScoreBody { question: &request.question, prefix: request.prefix_text() };
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
        let reply: ScoreReply = serde_json::from_str(&text).map_err(|e| format!("malformed body: {e}"))?;
        EvaluatorScore::new(reply.score).map_err(|e| format!("malformed body: {e}"))
    }
}

impl Evaluator for RemoteEvaluator {
    fn score(&self, request: &EvaluatorRequest) -> Result<EvaluatorScore, EvaluatorError> {
        let attempts = self.config.max_retries + 1;
        let mut last = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(self.config.backoff_ms << (attempt - 1)));
            }
            match self.try_once(request) {
                Ok(score) => return Ok(score),
                Err(e) => last = e,
            }
        }
        Err(EvaluatorError::Transport { attempts, message: last })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_http::{serve, Reply};
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    fn quick(url: String) -> RemoteEvaluatorConfig {
        RemoteEvaluatorConfig { backoff_ms: 1, timeout_ms: 2_000, ..RemoteEvaluatorConfig::new(url) }
    }

    fn req() -> EvaluatorRequest {
        EvaluatorRequest::new("Q", vec!["a = 1".into(), "b = 2".into()]).unwrap()
    }

    #[test]
    fn posts_question_and_joined_prefix() {
        let server = serve(|r| {
            assert_eq!(r.method, "POST");
            assert_eq!(r.path, "/v1/score");
            let body: serde_json::Value = serde_json::from_str(&r.body).unwrap();
            assert_eq!(body["question"], "Q");
            assert_eq!(body["prefix"], "a = 1\nb = 2");
            Reply::json(200, r#"{"score": 0.76}"#)
        });
        let ev = RemoteEvaluator::new(quick(server.url())).unwrap();
        assert_eq!(ev.score(&req()).unwrap().value(), 0.76);
    }

    #[test]
    fn retries_then_succeeds() {
        let hits = Arc::new(AtomicUsize::new(0));
        let h = hits.clone();
        let server = serve(move |_| {
            if h.fetch_add(1, Ordering::SeqCst) < 2 {
                Reply::json(503, "{}")
            } else {
                Reply::json(200, r#"{"score": 0.2}"#)
            }
        });
        let ev = RemoteEvaluator::new(quick(server.url())).unwrap();
        assert_eq!(ev.score(&req()).unwrap().value(), 0.2);
        assert_eq!(hits.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn gives_up_after_max_retries_without_a_score() {
        let hits = Arc::new(AtomicUsize::new(0));
        let h = hits.clone();
        let server = serve(move |_| {
            h.fetch_add(1, Ordering::SeqCst);
            Reply::json(200, r#"{"not_a_score": 1}"#)
        });
        let ev = RemoteEvaluator::new(quick(server.url())).unwrap();
        match ev.score(&req()) {
            Err(EvaluatorError::Transport { attempts, message }) => {
                assert_eq!(attempts, 4);
                assert!(message.contains("malformed"));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(hits.load(Ordering::SeqCst), 4);
    }

    #[test]
    fn out_of_range_score_is_malformed() {
        let server = serve(|_| Reply::json(200, r#"{"score": 1.7}"#));
        let ev = RemoteEvaluator::new(RemoteEvaluatorConfig { max_retries: 0, ..quick(server.url()) }).unwrap();
        assert!(matches!(ev.score(&req()), Err(EvaluatorError::Transport { attempts: 1, .. })));
    }

    #[test]
    fn unreachable_endpoint_is_transport_error() {
        let cfg = RemoteEvaluatorConfig { max_retries: 1, ..quick("http://127.0.0.1:9".into()) };
        let ev = RemoteEvaluator::new(cfg).unwrap();
        assert!(matches!(ev.score(&req()), Err(EvaluatorError::Transport { attempts: 2, .. })));
    }
}
