//! Blocking JSON-over-HTTP plumbing shared by the translation, chat and
//! embedding clients.

use std::time::Duration;

use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RemoteError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("rate limited (HTTP 429)")]
    RateLimited { retry_after: Option<Duration> },
    #[error("HTTP {code}: {body}")]
    Status { code: u16, body: String },
    #[error("bad response: {0}")]
    Decode(String),
}

impl RemoteError {
    /// Transport failures and transient server statuses.
    pub fn is_transport(&self) -> bool {
        match self {
            RemoteError::Transport(_) => true,
            RemoteError::Status { code, .. } => matches!(code, 408 | 500 | 502 | 503 | 504),
            _ => false,
        }
    }
}

/// `base * 2^attempt`, capped at 30 s.
pub fn backoff(base: Duration, attempt: u32) -> Duration {
    base.saturating_mul(1u32 << attempt.min(16)).min(Duration::from_secs(30))
}

pub fn join_url(base: &str, path: &str) -> String {
    format!("{}/{}", base.trim_end_matches('/'), path.trim_start_matches('/'))
}

#[derive(Debug, Clone)]
pub struct JsonClient {
    http: reqwest::blocking::Client,
    bearer: Option<String>,
}

impl JsonClient {
    pub fn new(timeout: Duration, bearer: Option<String>) -> Result<Self, RemoteError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| RemoteError::Transport(e.to_string()))?;
        Ok(JsonClient { http, bearer })
    }

    pub fn post(&self, url: &str, body: &Value) -> Result<Value, RemoteError> {
        let mut req = self.http.post(url).json(body);
        if let Some(token) = &self.bearer {
            req = req.bearer_auth(token);
        }
        let resp = req.send().map_err(|e| RemoteError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        if status == 429 {
            let retry_after = resp
                .headers()
                .get("retry-after")
                .and_then(|v| v.to_str().ok())
                .and_then(|v| v.trim().parse::<u64>().ok())
                .map(Duration::from_secs);
            return Err(RemoteError::RateLimited { retry_after });
        }
        let text = resp.text().map_err(|e| RemoteError::Transport(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(RemoteError::Status { code: status, body: text });
        }
        if text.trim().is_empty() {
            return Err(RemoteError::Decode("empty body".into()));
        }
        serde_json::from_str(&text).map_err(|e| RemoteError::Decode(e.to_string()))
    }
}
