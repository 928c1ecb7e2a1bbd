//! Back-translation: English to a pivot language and back.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use serde_json::json;

use super::{AugmentError, Augmenter, Generated};
use crate::corpus::{LabeledDocument, Source};
use crate::limiter::InFlightLimiter;
use crate::remote::{backoff, JsonClient, RemoteError};

pub const SOURCE_LANG: &str = "en";
pub const DEFAULT_PIVOT: &str = "fr";

pub trait TranslationProvider: Send + Sync {
    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String, RemoteError>;
}

impl<T: TranslationProvider + ?Sized> TranslationProvider for Arc<T> {
    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String, RemoteError> {
        (**self).translate(text, source, target)
    }
}

/// Returns its input unchanged.
#[derive(Debug, Default, Clone, Copy)]
pub struct IdentityTranslator;

impl TranslationProvider for IdentityTranslator {
    fn translate(&self, text: &str, _source: &str, _target: &str) -> Result<String, RemoteError> {
        Ok(text.to_string())
    }
}

/// Word-by-word lookup per language pair; unmapped words pass through.
#[derive(Debug, Default, Clone)]
pub struct DictionaryTranslator {
    maps: HashMap<(String, String), HashMap<String, String>>,
}

impl DictionaryTranslator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_pair<I, K, V>(mut self, source: &str, target: &str, words: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        let map = self.maps.entry((source.to_string(), target.to_string())).or_default();
        map.extend(words.into_iter().map(|(k, v)| (k.into().to_lowercase(), v.into())));
        self
    }
}

impl TranslationProvider for DictionaryTranslator {
    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String, RemoteError> {
        let map = self.maps.get(&(source.to_string(), target.to_string()));
        Ok(text
            .split_whitespace()
            .map(|w| {
                map.and_then(|m| m.get(&w.to_lowercase()))
                    .cloned()
                    .unwrap_or_else(|| w.to_string())
            })
            .collect::<Vec<_>>()
            .join(" "))
    }
}

/// HTTP provider: `POST {"q", "source", "target"}` returning
/// `{"translatedText"}`. Transport errors are retried with exponential
/// backoff; other failures are returned at once.
pub struct RemoteTranslator {
    endpoint: String,
    client: JsonClient,
    limiter: Arc<InFlightLimiter>,
    pub attempts: u32,
    pub backoff_base: Duration,
    calls: AtomicU64,
}

impl RemoteTranslator {
    pub fn new(endpoint: impl Into<String>, client: JsonClient, limiter: Arc<InFlightLimiter>) -> Self {
        RemoteTranslator {
            endpoint: endpoint.into(),
            client,
            limiter,
            attempts: 3,
            backoff_base: Duration::from_millis(500),
            calls: AtomicU64::new(0),
        }
    }

    /// HTTP requests issued so far, retries included.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    fn once(&self, text: &str, source: &str, target: &str) -> Result<String, RemoteError> {
        let _permit = self.limiter.acquire();
        self.calls.fetch_add(1, Ordering::Relaxed);
        let body = json!({ "q": text, "source": source, "target": target });
        let resp = self.client.post(&self.endpoint, &body)?;
        resp.get("translatedText")
            .and_then(|v| v.as_str())
            .map(str::to_string)
            .ok_or_else(|| RemoteError::Decode("missing translatedText".into()))
    }
}

impl TranslationProvider for RemoteTranslator {
    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String, RemoteError> {
        let mut attempt = 0;
        loop {
            match self.once(text, source, target) {
                Err(e) if e.is_transport() && attempt + 1 < self.attempts => {
                    log::warn!("translation attempt {} failed: {e}", attempt + 1);
                    std::thread::sleep(backoff(self.backoff_base, attempt));
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Forward,
    Backward,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Forward => "forward",
            Stage::Backward => "backward",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BtError {
    #[error("back-translation needs non-empty text")]
    EmptyInput,
    #[error("pivot language must differ from {SOURCE_LANG}")]
    PivotIsSource,
    #[error("{stage} translation returned empty text")]
    EmptyTranslation { stage: Stage },
    #[error("{stage} translation failed: {source}")]
    Provider {
        stage: Stage,
        #[source]
        source: RemoteError,
    },
}

impl BtError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, BtError::Provider { source, .. } if source.is_transport())
    }
}

pub fn backtranslate(text: &str, pivot: &str, provider: &dyn TranslationProvider) -> Result<String, BtError> {
    if text.trim().is_empty() {
        return Err(BtError::EmptyInput);
    }
    if pivot.eq_ignore_ascii_case(SOURCE_LANG) {
        return Err(BtError::PivotIsSource);
    }
    let step = |input: &str, from: &str, to: &str, stage: Stage| -> Result<String, BtError> {
        let out = provider
            .translate(input, from, to)
            .map_err(|source| BtError::Provider { stage, source })?;
        if out.trim().is_empty() {
            return Err(BtError::EmptyTranslation { stage });
        }
        Ok(out)
    };
    let there = step(text, SOURCE_LANG, pivot, Stage::Forward)?;
    step(&there, pivot, SOURCE_LANG, Stage::Backward)
}

pub struct BtAugmenter {
    provider: Box<dyn TranslationProvider>,
    pivot: String,
}

impl BtAugmenter {
    pub fn new(provider: Box<dyn TranslationProvider>, pivot: impl Into<String>) -> Self {
        BtAugmenter { provider, pivot: pivot.into() }
    }
}

impl Augmenter for BtAugmenter {
    fn method(&self) -> Source {
        Source::Bt
    }

    /// The seed is unused: back-translation is as deterministic as its provider.
    fn augment(&self, parent: &LabeledDocument, _seed: u64) -> Result<Generated, AugmentError> {
        let text = backtranslate(&parent.text, &self.pivot, self.provider.as_ref())?;
        let explanation = if parent.explanation.trim().is_empty() {
            String::new()
        } else {
            backtranslate(&parent.explanation, &self.pivot, self.provider.as_ref())?
        };
        Ok(Generated { text, explanation })
    }
}
