use std::sync::Arc;

use serde_json::json;

use crate::limiter::InFlightLimiter;
use crate::remote::{join_url, JsonClient, RemoteError};
use crate::rng::fnv1a;

pub trait EmbeddingProvider: Send + Sync {
    /// Column name used in reports.
    fn name(&self) -> &str;

    fn embed(&self, text: &str) -> Result<Vec<f64>, RemoteError>;
}

pub const BUILTIN_DIM: usize = 256;

/// Hashed character-trigram frequencies, L2-normalized.
///
/// Text is lowercased, whitespace runs collapse to one space and the
/// result is padded with a space on both sides before taking trigrams.
#[derive(Debug, Clone, Copy, Default)]
pub struct BuiltinEmbedder;

impl BuiltinEmbedder {
    pub fn vector(text: &str) -> Vec<f64> {
        let norm = text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
        let mut v = vec![0.0; BUILTIN_DIM];
        if norm.is_empty() {
            return v;
        }
        let chars: Vec<char> = format!(" {norm} ").chars().collect();
        let mut buf = String::with_capacity(12);
        for w in chars.windows(3) {
            buf.clear();
            buf.extend(w);
            v[(fnv1a(buf.as_bytes()) % BUILTIN_DIM as u64) as usize] += 1.0;
        }
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= len);
        v
    }
}

impl EmbeddingProvider for BuiltinEmbedder {
    fn name(&self) -> &str {
        "builtin-trigram"
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, RemoteError> {
        Ok(Self::vector(text))
    }
}

/// `POST /v1/embeddings {"model", "input"}` reading `data[0].embedding`.
pub struct RemoteEmbedder {
    base_url: String,
    model: String,
    client: JsonClient,
    limiter: Arc<InFlightLimiter>,
}

impl RemoteEmbedder {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>, client: JsonClient, limiter: Arc<InFlightLimiter>) -> Self {
        RemoteEmbedder { base_url: base_url.into(), model: model.into(), client, limiter }
    }
}

impl EmbeddingProvider for RemoteEmbedder {
    fn name(&self) -> &str {
        &self.model
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, RemoteError> {
        let _permit = self.limiter.acquire();
        let resp = self
            .client
            .post(&join_url(&self.base_url, "v1/embeddings"), &json!({ "model": self.model, "input": text }))?;
        let arr = resp
            .pointer("/data/0/embedding")
            .and_then(|v| v.as_array())
            .ok_or_else(|| RemoteError::Decode("missing data[0].embedding".into()))?;
        arr.iter()
            .map(|x| x.as_f64().ok_or_else(|| RemoteError::Decode("non-numeric embedding".into())))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CosineError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("zero-norm vector")]
    ZeroNorm,
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, CosineError> {
    if u.len() != v.len() {
        return Err(CosineError::DimensionMismatch(u.len(), v.len()));
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|b| b * b).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(CosineError::ZeroNorm);
    }
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_similarity() {
        let v = [0.3, -1.2, 4.0];
        assert!((cosine(&v, &v).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal() {
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn worked_value() {
        // dot 8, norms 3 and 3
        assert!((cosine(&[1.0, 2.0, 2.0], &[2.0, 1.0, 2.0]).unwrap() - 8.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert_eq!(cosine(&[1.0], &[1.0, 2.0]), Err(CosineError::DimensionMismatch(1, 2)));
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 2.0]), Err(CosineError::ZeroNorm));
    }

    #[test]
    fn builtin_is_unit_and_stable() {
        let a = BuiltinEmbedder::vector("I can't sleep at night");
        assert_eq!(a.len(), BUILTIN_DIM);
        assert!((a.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() < 1e-9);
        assert_eq!(a, BuiltinEmbedder::vector("i  CAN'T sleep at night"));
        assert!(a.iter().all(|x| *x >= 0.0));
        assert!(BuiltinEmbedder::vector("").iter().all(|x| *x == 0.0));
        assert!(BuiltinEmbedder::vector("a").iter().any(|x| *x > 0.0));
    }
}
