//! Prompt-based generation of similar text and short explanations over an
//! OpenAI-compatible completion endpoint.

use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{AugmentError, Augmenter, Generated};
use crate::corpus::{LabeledDocument, Source};
use crate::label::Label;
use crate::limiter::InFlightLimiter;
use crate::remote::{backoff, join_url, JsonClient, RemoteError};
use crate::rng;
use crate::text::normalize_for_dedup;

pub const API_KEY_ENV: &str = "WDAUG_API_KEY";
pub const EXEMPLAR_COUNT: usize = 5;

const SAMPLE_EXEMPLARS: &str = include_str!("../../data/exemplars.json");

pub fn render_similar_text_prompt(topic: &str, text: &str) -> String {
    format!(
        "Considering the given topic, generate similar text to the given text.\nTopic: {topic}\nText: {text}\nSimilar text:"
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exemplar {
    pub text: String,
    pub explanation: String,
    pub label: Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    SimilarText,
    Explanation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub kind: PromptKind,
    /// Few-shot pairs, in the order they appear in every prompt.
    pub exemplars: Vec<Exemplar>,
}

impl PromptTemplate {
    pub fn similar_text() -> Self {
        PromptTemplate { kind: PromptKind::SimilarText, exemplars: Vec::new() }
    }

    /// Explanation template; needs five exemplars covering all four labels.
    pub fn explanation(exemplars: Vec<Exemplar>) -> Result<Self, LlmError> {
        if exemplars.len() != EXEMPLAR_COUNT {
            return Err(LlmError::ExemplarCount(exemplars.len()));
        }
        for label in Label::ALL {
            if !exemplars.iter().any(|e| e.label == label) {
                return Err(LlmError::ExemplarLabelMissing(label));
            }
        }
        if exemplars.iter().any(|e| e.text.trim().is_empty() || e.explanation.trim().is_empty()) {
            return Err(LlmError::Config("exemplar with empty text or explanation".into()));
        }
        Ok(PromptTemplate { kind: PromptKind::Explanation, exemplars })
    }

    pub fn explanation_from_path(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path)
            .map_err(|e| LlmError::Config(format!("{}: {e}", path.display())))?;
        Self::explanation_from_json(&json)
    }

    pub fn explanation_from_json(json: &str) -> Result<Self, LlmError> {
        let exemplars: Vec<Exemplar> =
            serde_json::from_str(json).map_err(|e| LlmError::Config(format!("exemplar file: {e}")))?;
        Self::explanation(exemplars)
    }

    /// The sample exemplar set bundled with the crate.
    pub fn sample_explanation() -> Self {
        Self::explanation_from_json(SAMPLE_EXEMPLARS).expect("bundled exemplars are valid")
    }
}

pub fn render_explanation_prompt(
    template: &PromptTemplate,
    original: (&str, &str),
    augmented_text: &str,
) -> Result<String, LlmError> {
    if template.kind != PromptKind::Explanation {
        return Err(LlmError::Config("explanation prompt needs an explanation template".into()));
    }
    if template.exemplars.len() != EXEMPLAR_COUNT {
        return Err(LlmError::ExemplarCount(template.exemplars.len()));
    }
    let mut out = String::from("Consider the examples and generate a very short explanation of the given text.\n\n");
    for e in &template.exemplars {
        out.push_str(&format!("text: {}\nexplanation: {}\n", e.text, e.explanation));
    }
    out.push_str(&format!("text: {}\nexplanation: {}\n\n", original.0, original.1));
    out.push_str(&format!("text: {augmented_text}\nexplanation:"));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApiStyle {
    /// `/v1/chat/completions`, reads `choices[0].message.content`.
    Chat,
    /// `/v1/completions`, reads `choices[0].text`.
    Completions,
}

impl ApiStyle {
    /// Legacy `text-*` models speak the completions protocol.
    pub fn for_model(model: &str) -> ApiStyle {
        if model.starts_with("text-") {
            ApiStyle::Completions
        } else {
            ApiStyle::Chat
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenParams {
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Retries after transport failures.
    pub max_retries: u32,
    /// Retries when the completion is empty or repeats the input.
    pub dedup_retries: u32,
    /// Retries after HTTP 429, counted apart from transport retries.
    pub rate_limit_retries: u32,
    pub backoff_base_ms: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            model: "gpt-3.5-turbo".into(),
            temperature: 0.7,
            max_tokens: 256,
            max_retries: 3,
            dedup_retries: 2,
            rate_limit_retries: 5,
            backoff_base_ms: 500,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<(), LlmError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(LlmError::Config(format!("temperature {} outside [0, 2]", self.temperature)));
        }
        if self.max_tokens == 0 {
            return Err(LlmError::Config("max_tokens must be at least 1".into()));
        }
        Ok(())
    }

    fn backoff_base(&self) -> Duration {
        Duration::from_millis(self.backoff_base_ms)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LlmError {
    #[error("explanation template needs exactly {EXEMPLAR_COUNT} exemplars, got {0}")]
    ExemplarCount(usize),
    #[error("exemplars do not cover label {0}")]
    ExemplarLabelMissing(Label),
    #[error("{0}")]
    Config(String),
    #[error("record {0:?} is not an original record")]
    NotOriginal(String),
    #[error("parent {0:?} has no explanation to use as the worked example")]
    MissingExplanation(String),
    #[error("parent {parent_id:?}: request failed after {calls} calls: {source}")]
    Request {
        parent_id: String,
        calls: u32,
        #[source]
        source: RemoteError,
    },
    #[error("parent {parent_id:?}: completion still empty after {calls} calls")]
    EmptyCompletion { parent_id: String, calls: u32 },
}

pub trait ChatClient: Send + Sync {
    /// One completion request. `seed` is forwarded to servers that accept it.
    fn complete(&self, prompt: &str, params: &GenParams, seed: u64) -> Result<String, RemoteError>;
}

impl<T: ChatClient + ?Sized> ChatClient for Arc<T> {
    fn complete(&self, prompt: &str, params: &GenParams, seed: u64) -> Result<String, RemoteError> {
        (**self).complete(prompt, params, seed)
    }
}

pub struct HttpChatClient {
    base_url: String,
    style: Option<ApiStyle>,
    client: JsonClient,
    limiter: Arc<InFlightLimiter>,
    calls: AtomicU64,
}

impl HttpChatClient {
    /// `style` of `None` picks the protocol from the model name.
    pub fn new(base_url: impl Into<String>, style: Option<ApiStyle>, client: JsonClient, limiter: Arc<InFlightLimiter>) -> Self {
        HttpChatClient { base_url: base_url.into(), style, client, limiter, calls: AtomicU64::new(0) }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

impl ChatClient for HttpChatClient {
    fn complete(&self, prompt: &str, params: &GenParams, seed: u64) -> Result<String, RemoteError> {
        let style = self.style.unwrap_or_else(|| ApiStyle::for_model(&params.model));
        let (path, body) = match style {
            ApiStyle::Chat => (
                "v1/chat/completions",
                json!({
                    "model": params.model,
                    "messages": [{ "role": "user", "content": prompt }],
                    "temperature": params.temperature,
                    "max_tokens": params.max_tokens,
                    "seed": seed,
                }),
            ),
            ApiStyle::Completions => (
                "v1/completions",
                json!({
                    "model": params.model,
                    "prompt": prompt,
                    "temperature": params.temperature,
                    "max_tokens": params.max_tokens,
                    "seed": seed,
                }),
            ),
        };
        let _permit = self.limiter.acquire();
        self.calls.fetch_add(1, Ordering::Relaxed);
        let resp = self.client.post(&join_url(&self.base_url, path), &body)?;
        extract_completion(&resp, style)
    }
}

fn extract_completion(resp: &Value, style: ApiStyle) -> Result<String, RemoteError> {
    let choice = resp
        .get("choices")
        .and_then(|c| c.get(0))
        .ok_or_else(|| RemoteError::Decode("response has no choices".into()))?;
    let text = match style {
        ApiStyle::Chat => choice.get("message").and_then(|m| m.get("content")),
        ApiStyle::Completions => choice.get("text"),
    };
    text.and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| RemoteError::Decode("completion text missing".into()))
}

/// Generated record before it is given an id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedDocument {
    pub parent_id: String,
    pub label: Label,
    pub method: Source,
    pub text: String,
    pub explanation: String,
    /// The text repeated the parent even after all dedup retries.
    pub duplicate_accepted: bool,
}

enum Verdict {
    Accept,
    Retry,
}

struct Outcome {
    text: String,
    retries_exhausted: bool,
}

/// Shared retry loop. Each failure kind has its own retry budget.
fn complete_with_policy(
    client: &dyn ChatClient,
    prompt: &str,
    params: &GenParams,
    seed: u64,
    parent_id: &str,
    judge: impl Fn(&str) -> Verdict,
) -> Result<Outcome, LlmError> {
    let (mut transport, mut limited, mut dedup, mut calls) = (0u32, 0u32, 0u32, 0u32);
    loop {
        let call_seed = rng::derive_seed(seed, "call", u64::from(calls));
        calls += 1;
        match client.complete(prompt, params, call_seed) {
            Ok(raw) => {
                let text = clean_completion(&raw, prompt);
                let acceptable = !text.is_empty() && matches!(judge(&text), Verdict::Accept);
                if acceptable {
                    return Ok(Outcome { text, retries_exhausted: false });
                }
                if dedup < params.dedup_retries {
                    dedup += 1;
                    continue;
                }
                if text.is_empty() {
                    return Err(LlmError::EmptyCompletion { parent_id: parent_id.into(), calls });
                }
                return Ok(Outcome { text, retries_exhausted: true });
            }
            Err(RemoteError::RateLimited { retry_after }) => {
                if limited >= params.rate_limit_retries {
                    return Err(LlmError::Request {
                        parent_id: parent_id.into(),
                        calls,
                        source: RemoteError::RateLimited { retry_after },
                    });
                }
                std::thread::sleep(retry_after.unwrap_or_else(|| backoff(params.backoff_base(), limited)));
                limited += 1;
            }
            Err(e) if e.is_transport() && transport < params.max_retries => {
                log::debug!("parent {parent_id}: transport failure ({e}), retrying");
                std::thread::sleep(backoff(params.backoff_base(), transport));
                transport += 1;
            }
            Err(source) => {
                return Err(LlmError::Request { parent_id: parent_id.into(), calls, source });
            }
        }
    }
}

/// Drop an echoed prompt prefix, then surrounding whitespace.
fn clean_completion(raw: &str, prompt: &str) -> String {
    let trimmed = raw.trim_start();
    trimmed.strip_prefix(prompt).unwrap_or(trimmed).trim().to_string()
}

pub fn generate_similar(
    doc: &LabeledDocument,
    params: &GenParams,
    client: &dyn ChatClient,
    seed: u64,
) -> Result<AugmentedDocument, LlmError> {
    if doc.source != Source::Original {
        return Err(LlmError::NotOriginal(doc.id.clone()));
    }
    let prompt = render_similar_text_prompt(doc.label.long_name(), &doc.text);
    let original = normalize_for_dedup(&doc.text);
    let out = complete_with_policy(client, &prompt, params, seed, &doc.id, |t| {
        if normalize_for_dedup(t) == original {
            Verdict::Retry
        } else {
            Verdict::Accept
        }
    })?;
    if out.retries_exhausted {
        log::warn!("parent {}: generated text repeats the original; accepting after {} retries", doc.id, params.dedup_retries);
    }
    Ok(AugmentedDocument {
        parent_id: doc.id.clone(),
        label: doc.label,
        method: Source::Llm,
        text: out.text,
        explanation: String::new(),
        duplicate_accepted: out.retries_exhausted,
    })
}

pub fn generate_explanation(
    aug: &AugmentedDocument,
    parent: &LabeledDocument,
    template: &PromptTemplate,
    params: &GenParams,
    client: &dyn ChatClient,
    seed: u64,
) -> Result<String, LlmError> {
    if parent.explanation.trim().is_empty() {
        return Err(LlmError::MissingExplanation(parent.id.clone()));
    }
    let prompt = render_explanation_prompt(template, (&parent.text, &parent.explanation), &aug.text)?;
    let out = complete_with_policy(client, &prompt, params, seed, &parent.id, |_| Verdict::Accept)?;
    Ok(out.text)
}

pub struct LlmAugmenter {
    client: Box<dyn ChatClient>,
    params: GenParams,
    template: PromptTemplate,
}

impl LlmAugmenter {
    pub fn new(client: Box<dyn ChatClient>, params: GenParams, template: PromptTemplate) -> Self {
        LlmAugmenter { client, params, template }
    }
}

impl Augmenter for LlmAugmenter {
    fn method(&self) -> Source {
        Source::Llm
    }

    fn augment(&self, parent: &LabeledDocument, seed: u64) -> Result<Generated, AugmentError> {
        let mut aug = generate_similar(parent, &self.params, self.client.as_ref(), seed)?;
        if !parent.explanation.trim().is_empty() {
            aug.explanation = generate_explanation(
                &aug,
                parent,
                &self.template,
                &self.params,
                self.client.as_ref(),
                rng::derive_seed(seed, "explanation", 0),
            )?;
        }
        Ok(Generated { text: aug.text, explanation: aug.explanation })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    /// Replays a fixed script of responses and records every prompt.
    struct Scripted {
        script: Mutex<Vec<Result<String, RemoteError>>>,
        prompts: Mutex<Vec<String>>,
    }

    impl Scripted {
        fn new(mut script: Vec<Result<String, RemoteError>>) -> Self {
            script.reverse();
            Scripted { script: Mutex::new(script), prompts: Mutex::new(vec![]) }
        }

        fn calls(&self) -> usize {
            self.prompts.lock().unwrap().len()
        }
    }

    impl ChatClient for Scripted {
        fn complete(&self, prompt: &str, _params: &GenParams, _seed: u64) -> Result<String, RemoteError> {
            self.prompts.lock().unwrap().push(prompt.to_string());
            self.script.lock().unwrap().pop().expect("script exhausted")
        }
    }

    fn fast() -> GenParams {
        GenParams { backoff_base_ms: 0, ..GenParams::default() }
    }

    fn parent() -> LabeledDocument {
        LabeledDocument::original("p1", "I can't sleep at night.", "can't sleep", Label::PA)
    }

    fn transport() -> Result<String, RemoteError> {
        Err(RemoteError::Transport("connection reset".into()))
    }

    #[test]
    fn similar_prompt_layout() {
        assert_eq!(
            render_similar_text_prompt("Physical Aspect", "I can't sleep at night."),
            "Considering the given topic, generate similar text to the given text.\n\
             Topic: Physical Aspect\n\
             Text: I can't sleep at night.\n\
             Similar text:"
        );
    }

    #[test]
    fn explanation_prompt_markers() {
        let t = PromptTemplate::sample_explanation();
        let p = render_explanation_prompt(&t, ("orig text", "orig why"), "new text").unwrap();
        assert_eq!(p.lines().filter(|l| l.starts_with("text:")).count(), 7);
        assert_eq!(p.matches("explanation:").count(), 7);
        assert!(p.starts_with("Consider the examples and generate a very short explanation of the given text.\n\n"));
        assert!(p.ends_with("explanation: orig why\n\ntext: new text\nexplanation:"));
        assert_eq!(p, render_explanation_prompt(&t, ("orig text", "orig why"), "new text").unwrap());
    }

    #[test]
    fn exemplar_count_enforced() {
        let mut ex = PromptTemplate::sample_explanation().exemplars;
        ex.pop();
        assert_eq!(PromptTemplate::explanation(ex.clone()), Err(LlmError::ExemplarCount(4)));
        let forged = PromptTemplate { kind: PromptKind::Explanation, exemplars: ex };
        assert_eq!(render_explanation_prompt(&forged, ("a", "b"), "c"), Err(LlmError::ExemplarCount(4)));
    }

    #[test]
    fn exemplars_must_cover_labels() {
        let mut ex = PromptTemplate::sample_explanation().exemplars;
        for e in &mut ex {
            if e.label == Label::SEA {
                e.label = Label::PA;
            }
        }
        assert_eq!(PromptTemplate::explanation(ex), Err(LlmError::ExemplarLabelMissing(Label::SEA)));
    }

    #[test]
    fn echo_paraphrase_accepted() {
        let c = Scripted::new(vec![Ok("PARAPHRASE: I can't sleep at night.".into())]);
        let a = generate_similar(&parent(), &fast(), &c, 1).unwrap();
        assert_eq!(a.text, "PARAPHRASE: I can't sleep at night.");
        assert_eq!(a.label, Label::PA);
        assert_eq!(a.parent_id, "p1");
        assert_eq!(a.method, Source::Llm);
        assert!(!a.duplicate_accepted);
    }

    #[test]
    fn verbatim_echo_exhausts_dedup_then_accepts() {
        let verbatim = || Ok("  i CAN'T sleep   at night. ".to_string());
        let c = Scripted::new(vec![verbatim(), verbatim(), verbatim()]);
        let params = GenParams { dedup_retries: 2, ..fast() };
        let a = generate_similar(&parent(), &params, &c, 1).unwrap();
        assert_eq!(c.calls(), 3);
        assert!(a.duplicate_accepted);
    }

    #[test]
    fn transport_failures_retried() {
        let c = Scripted::new(vec![transport(), transport(), Ok("different".into())]);
        let params = GenParams { max_retries: 3, ..fast() };
        assert_eq!(generate_similar(&parent(), &params, &c, 1).unwrap().text, "different");
        assert_eq!(c.calls(), 3);
    }

    #[test]
    fn transport_budget_exhausted_names_parent() {
        let c = Scripted::new(vec![transport(), transport(), transport()]);
        let params = GenParams { max_retries: 2, ..fast() };
        let err = generate_similar(&parent(), &params, &c, 1).unwrap_err();
        assert!(matches!(&err, LlmError::Request { parent_id, calls: 3, .. } if parent_id == "p1"), "{err}");
    }

    #[test]
    fn rate_limits_counted_separately() {
        let limited = || Err(RemoteError::RateLimited { retry_after: Some(Duration::ZERO) });
        let c = Scripted::new(vec![limited(), transport(), limited(), Ok("fresh".into())]);
        let params = GenParams { max_retries: 1, rate_limit_retries: 2, ..fast() };
        assert_eq!(generate_similar(&parent(), &params, &c, 1).unwrap().text, "fresh");
        assert_eq!(c.calls(), 4);
    }

    #[test]
    fn empty_completion_is_dedup_failure() {
        let c = Scripted::new(vec![Ok("   ".into()), Ok("new words".into())]);
        assert_eq!(generate_similar(&parent(), &fast(), &c, 1).unwrap().text, "new words");
        let c = Scripted::new(vec![Ok("".into()), Ok("".into()), Ok("".into())]);
        assert!(matches!(generate_similar(&parent(), &fast(), &c, 1), Err(LlmError::EmptyCompletion { calls: 3, .. })));
    }

    #[test]
    fn non_transport_error_not_retried() {
        let c = Scripted::new(vec![Err(RemoteError::Status { code: 401, body: "no key".into() })]);
        assert!(generate_similar(&parent(), &fast(), &c, 1).is_err());
        assert_eq!(c.calls(), 1);
    }

    #[test]
    fn echoed_prompt_is_trimmed() {
        let prompt = render_similar_text_prompt("Physical Aspect", "I can't sleep at night.");
        let c = Scripted::new(vec![Ok(format!("{prompt} Nights are sleepless for me.\n"))]);
        assert_eq!(generate_similar(&parent(), &fast(), &c, 1).unwrap().text, "Nights are sleepless for me.");
    }

    #[test]
    fn rejects_augmented_parent() {
        let mut d = parent();
        d.source = Source::Eda;
        d.parent_id = Some("x".into());
        let c = Scripted::new(vec![]);
        assert_eq!(generate_similar(&d, &fast(), &c, 1).unwrap_err(), LlmError::NotOriginal("p1".into()));
    }

    #[test]
    fn explanation_flow() {
        let t = PromptTemplate::sample_explanation();
        let aug = AugmentedDocument {
            parent_id: "p1".into(),
            label: Label::PA,
            method: Source::Llm,
            text: "Sleep escapes me.".into(),
            explanation: String::new(),
            duplicate_accepted: false,
        };
        let c = Scripted::new(vec![Ok("short reason".into())]);
        assert_eq!(generate_explanation(&aug, &parent(), &t, &fast(), &c, 2).unwrap(), "short reason");
        let sent = c.prompts.lock().unwrap()[0].clone();
        assert!(sent.contains("I can't sleep at night."));
        assert!(sent.contains("text: Sleep escapes me.\nexplanation:"));

        let mut bare = parent();
        bare.explanation.clear();
        let c = Scripted::new(vec![]);
        assert_eq!(
            generate_explanation(&aug, &bare, &t, &fast(), &c, 2),
            Err(LlmError::MissingExplanation("p1".into()))
        );
    }

    #[test]
    fn params_validation_and_style() {
        assert!(GenParams::default().validate().is_ok());
        assert!(GenParams { temperature: 2.5, ..GenParams::default() }.validate().is_err());
        assert!(GenParams { max_tokens: 0, ..GenParams::default() }.validate().is_err());
        assert_eq!(ApiStyle::for_model("text-davinci-003"), ApiStyle::Completions);
        assert_eq!(ApiStyle::for_model("gpt-3.5-turbo-0301"), ApiStyle::Chat);
    }

    #[test]
    fn completion_extraction() {
        let chat = json!({"choices": [{"message": {"role": "assistant", "content": "hi"}}]});
        assert_eq!(extract_completion(&chat, ApiStyle::Chat).unwrap(), "hi");
        let legacy = json!({"choices": [{"text": "yo"}]});
        assert_eq!(extract_completion(&legacy, ApiStyle::Completions).unwrap(), "yo");
        assert!(extract_completion(&json!({"choices": []}), ApiStyle::Chat).is_err());
    }
}
