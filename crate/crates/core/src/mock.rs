//! Offline stand-in for every remote provider, served from one local
//! HTTP listener.
//!
//! Responses are pure functions of the request body and the configured
//! seed, so concurrent clients see the same answers regardless of
//! scheduling. The only state is the counter behind `rate_limit_first`.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use axum::extract::State;
use axum::http::{HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::{Json, Router};
use serde_json::{json, Value};
use tokio::sync::oneshot;

use crate::augment::eda::{eda_augment, EdaParams, SynonymLexicon};
use crate::rng::{derive_seed, fnv1a};
use crate::similarity::BuiltinEmbedder;

#[derive(Debug, Clone, Default)]
pub struct MockConfig {
    pub seed: u64,
    /// Answer the first N requests with HTTP 429.
    pub rate_limit_first: usize,
    /// Return the input text verbatim instead of a paraphrase.
    pub echo: bool,
    /// Translation endpoint answers with an empty body.
    pub empty_translation: bool,
}

struct AppState {
    config: MockConfig,
    lexicon: SynonymLexicon,
    served: AtomicUsize,
}

impl AppState {
    fn throttled(&self) -> Option<Response> {
        let n = self.served.fetch_add(1, Ordering::SeqCst);
        if n < self.config.rate_limit_first {
            let mut headers = HeaderMap::new();
            headers.insert("retry-after", HeaderValue::from_static("0"));
            return Some((StatusCode::TOO_MANY_REQUESTS, headers, "slow down").into_response());
        }
        None
    }

    fn paraphrase(&self, text: &str, salt: u64) -> String {
        let params = EdaParams { alpha: 0.3, n_aug: 1, seed: derive_seed(self.config.seed, text, salt), compose: true };
        eda_augment(text, &params, &self.lexicon).remove(0)
    }

    fn respond(&self, prompt: &str, salt: u64) -> String {
        if let Some(rest) = prompt.strip_prefix("Considering the given topic") {
            let text = rest
                .split_once("\nText: ")
                .map(|(_, t)| t.trim_end_matches("Similar text:").trim_end())
                .unwrap_or("");
            if self.config.echo {
                return text.to_string();
            }
            return self.paraphrase(text, salt);
        }
        if prompt.starts_with("Consider the examples") {
            let last = prompt.lines().rev().find_map(|l| l.strip_prefix("text: ")).unwrap_or("");
            return last.split_whitespace().take(6).collect::<Vec<_>>().join(" ");
        }
        "ok".to_string()
    }

    fn translate(&self, q: &str, target: &str) -> String {
        if self.config.empty_translation {
            return String::new();
        }
        if target != "en" {
            return q.split_whitespace().map(|w| format!("~{w}")).collect::<Vec<_>>().join(" ");
        }
        q.split_whitespace()
            .map(|w| {
                let w = w.trim_start_matches('~');
                let lower = w.to_lowercase();
                let syns = self.lexicon.synonyms(&lower);
                let h = fnv1a(lower.as_bytes()) ^ self.config.seed;
                if !syns.is_empty() && h.is_multiple_of(3) {
                    syns[(h / 3) as usize % syns.len()].clone()
                } else {
                    w.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

type Shared = Arc<AppState>;

fn salt_of(body: &Value) -> u64 {
    body.get("seed").and_then(Value::as_u64).unwrap_or(0)
}

async fn chat(State(st): State<Shared>, Json(body): Json<Value>) -> Response {
    if let Some(r) = st.throttled() {
        return r;
    }
    let prompt = body
        .get("messages")
        .and_then(Value::as_array)
        .and_then(|m| m.last())
        .and_then(|m| m.get("content"))
        .and_then(Value::as_str)
        .unwrap_or("");
    let content = st.respond(prompt, salt_of(&body));
    Json(json!({
        "object": "chat.completion",
        "model": body.get("model").cloned().unwrap_or(Value::Null),
        "choices": [{ "index": 0, "message": { "role": "assistant", "content": content }, "finish_reason": "stop" }],
    }))
    .into_response()
}

async fn completions(State(st): State<Shared>, Json(body): Json<Value>) -> Response {
    if let Some(r) = st.throttled() {
        return r;
    }
    let prompt = body.get("prompt").and_then(Value::as_str).unwrap_or("");
    let text = st.respond(prompt, salt_of(&body));
    Json(json!({
        "object": "text_completion",
        "model": body.get("model").cloned().unwrap_or(Value::Null),
        "choices": [{ "index": 0, "text": text, "finish_reason": "stop" }],
    }))
    .into_response()
}

async fn embeddings(State(st): State<Shared>, Json(body): Json<Value>) -> Response {
    if let Some(r) = st.throttled() {
        return r;
    }
    let inputs: Vec<String> = match body.get("input") {
        Some(Value::String(s)) => vec![s.clone()],
        Some(Value::Array(a)) => a.iter().filter_map(|v| v.as_str().map(String::from)).collect(),
        _ => return (StatusCode::BAD_REQUEST, "input required").into_response(),
    };
    let data: Vec<Value> = inputs
        .iter()
        .enumerate()
        .map(|(i, t)| json!({ "object": "embedding", "index": i, "embedding": BuiltinEmbedder::vector(t) }))
        .collect();
    Json(json!({ "object": "list", "data": data })).into_response()
}

async fn translate(State(st): State<Shared>, Json(body): Json<Value>) -> Response {
    if let Some(r) = st.throttled() {
        return r;
    }
    if st.config.empty_translation {
        return (StatusCode::OK, "").into_response();
    }
    let q = body.get("q").and_then(Value::as_str).unwrap_or("");
    let target = body.get("target").and_then(Value::as_str).unwrap_or("en");
    Json(json!({ "translatedText": st.translate(q, target) })).into_response()
}

pub fn router(config: MockConfig) -> Router {
    let state = Arc::new(AppState { config, lexicon: SynonymLexicon::starter(), served: AtomicUsize::new(0) });
    Router::new()
        .route("/v1/chat/completions", post(chat))
        .route("/v1/completions", post(completions))
        .route("/v1/embeddings", post(embeddings))
        .route("/translate", post(translate))
        .with_state(state)
}

/// A mock server on a background thread; stops when dropped.
pub struct MockServer {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl MockServer {
    /// Bind to an ephemeral localhost port and start serving.
    pub fn start(config: MockConfig) -> std::io::Result<MockServer> {
        Self::start_on("127.0.0.1:0".parse().expect("valid addr"), config)
    }

    pub fn start_on(addr: SocketAddr, config: MockConfig) -> std::io::Result<MockServer> {
        let std_listener = std::net::TcpListener::bind(addr)?;
        std_listener.set_nonblocking(true)?;
        let addr = std_listener.local_addr()?;
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()?;
        let (tx, rx) = oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(std_listener).expect("listener converts");
                let _ = axum::serve(listener, router(config))
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await;
            });
        });
        Ok(MockServer { addr, shutdown: Some(tx), thread: Some(thread) })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Block the calling thread until the server stops.
    pub fn wait(mut self) {
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}
