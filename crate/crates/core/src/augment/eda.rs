//! Easy Data Augmentation: synonym replacement, random insertion,
//! random swap and random deletion over word tokens.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AugmentError, Augmenter, Generated};
use crate::corpus::{LabeledDocument, Source};
use crate::rng::{self, SeededRng};
use crate::text::{detokenize, tokenize};

const STARTER_LEXICON: &str = include_str!("../../data/lexicon.json");

/// Lowercase word to synonyms. Words never map to an empty list.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymLexicon {
    entries: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("lexicon is not a JSON map of word to synonym list: {0}")]
    Format(#[from] serde_json::Error),
}

impl SynonymLexicon {
    /// Builds a lexicon with lowercased keys and synonyms. Unusable synonyms
    /// (self-maps, repeats, multi-word phrases) are dropped first, then any
    /// word left without synonyms.
    pub fn new<I, S, V>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, V)>,
        S: AsRef<str>,
        V: IntoIterator,
        V::Item: AsRef<str>,
    {
        let mut map: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (word, syns) in entries {
            let word = word.as_ref().trim().to_lowercase();
            if word.is_empty() {
                continue;
            }
            let list = map.entry(word.clone()).or_default();
            for s in syns {
                let s = s.as_ref().trim().to_lowercase();
                if !s.is_empty() && !s.contains(char::is_whitespace) && s != word && !list.contains(&s) {
                    list.push(s);
                }
            }
        }
        map.retain(|_, v| !v.is_empty());
        SynonymLexicon { entries: map }
    }

    pub fn from_json_str(json: &str) -> Result<Self, LexiconError> {
        let raw: BTreeMap<String, Vec<String>> = serde_json::from_str(json)?;
        Ok(Self::new(raw))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&json)
    }

    /// Small general-purpose lexicon bundled with the crate.
    pub fn starter() -> Self {
        Self::from_json_str(STARTER_LEXICON).expect("bundled lexicon is valid")
    }

    pub fn synonyms(&self, word: &str) -> &[String] {
        self.entries.get(word).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EdaParams {
    /// Per-operation intensity in `[0, 1]`.
    pub alpha: f64,
    pub n_aug: usize,
    pub seed: u64,
    /// Apply all four operations in sequence instead of one per variant.
    pub compose: bool,
}

impl Default for EdaParams {
    fn default() -> Self {
        EdaParams { alpha: 0.1, n_aug: 1, seed: 0, compose: false }
    }
}

impl EdaParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(format!("eda alpha {} outside [0, 1]", self.alpha));
        }
        if self.n_aug == 0 {
            return Err("eda n_aug must be at least 1".into());
        }
        Ok(())
    }

    /// Number of edits for every operation except deletion.
    pub fn edits_for(&self, len: usize) -> usize {
        ((self.alpha * len as f64).ceil() as usize).max(1)
    }
}

pub fn synonym_replacement(tokens: &[String], n: usize, lexicon: &SynonymLexicon, rng: &mut SeededRng) -> Vec<String> {
    let mut out = tokens.to_vec();
    let mut candidates: Vec<usize> = (0..tokens.len())
        .filter(|&i| !lexicon.synonyms(&tokens[i]).is_empty())
        .collect();
    candidates.shuffle(rng);
    for &i in candidates.iter().take(n) {
        let syns = lexicon.synonyms(&tokens[i]);
        out[i] = syns[rng.gen_range(0..syns.len())].clone();
    }
    out
}

pub fn random_insertion(tokens: &[String], n: usize, lexicon: &SynonymLexicon, rng: &mut SeededRng) -> Vec<String> {
    let sources: Vec<&[String]> = tokens
        .iter()
        .map(|t| lexicon.synonyms(t))
        .filter(|s| !s.is_empty())
        .collect();
    let mut out = tokens.to_vec();
    if sources.is_empty() {
        return out;
    }
    for _ in 0..n {
        let syns = sources[rng.gen_range(0..sources.len())];
        let word = syns[rng.gen_range(0..syns.len())].clone();
        let at = rng.gen_range(0..=out.len());
        out.insert(at, word);
    }
    out
}

pub fn random_swap(tokens: &[String], n: usize, rng: &mut SeededRng) -> Vec<String> {
    let mut out = tokens.to_vec();
    let len = out.len();
    if len < 2 {
        return out;
    }
    for _ in 0..n {
        let i = rng.gen_range(0..len);
        let mut j = rng.gen_range(0..len - 1);
        if j >= i {
            j += 1;
        }
        out.swap(i, j);
    }
    out
}

/// Drops each token with probability `p`. If nothing survives, one random
/// input token is returned instead.
pub fn random_deletion(tokens: &[String], p: f64, rng: &mut SeededRng) -> Vec<String> {
    if tokens.len() <= 1 {
        return tokens.to_vec();
    }
    let p = p.clamp(0.0, 1.0);
    let out: Vec<String> = tokens.iter().filter(|_| !rng.gen_bool(p)).cloned().collect();
    if out.is_empty() {
        return vec![tokens[rng.gen_range(0..tokens.len())].clone()];
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdaOp {
    SynonymReplacement,
    RandomInsertion,
    RandomSwap,
    RandomDeletion,
}

impl EdaOp {
    pub const ALL: [EdaOp; 4] = [
        EdaOp::SynonymReplacement,
        EdaOp::RandomInsertion,
        EdaOp::RandomSwap,
        EdaOp::RandomDeletion,
    ];

    pub fn apply(self, tokens: &[String], params: &EdaParams, lexicon: &SynonymLexicon, rng: &mut SeededRng) -> Vec<String> {
        let n = params.edits_for(tokens.len());
        match self {
            EdaOp::SynonymReplacement => synonym_replacement(tokens, n, lexicon, rng),
            EdaOp::RandomInsertion => random_insertion(tokens, n, lexicon, rng),
            EdaOp::RandomSwap => random_swap(tokens, n, rng),
            EdaOp::RandomDeletion => random_deletion(tokens, params.alpha, rng),
        }
    }
}

// Attempts per variant at producing something different from the input.
const MAX_TRIES: usize = 10;

/// Returns exactly `params.n_aug` variants of `text`.
pub fn eda_augment(text: &str, params: &EdaParams, lexicon: &SynonymLexicon) -> Vec<String> {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return vec![text.to_string(); params.n_aug];
    }
    let mut rng = rng::seeded(params.seed);
    (0..params.n_aug)
        .map(|_| {
            let mut candidate = tokens.clone();
            for _ in 0..MAX_TRIES {
                candidate = if params.compose {
                    EdaOp::ALL
                        .iter()
                        .fold(tokens.clone(), |acc, op| op.apply(&acc, params, lexicon, &mut rng))
                } else {
                    let op = EdaOp::ALL[rng.gen_range(0..EdaOp::ALL.len())];
                    op.apply(&tokens, params, lexicon, &mut rng)
                };
                if candidate != tokens {
                    break;
                }
            }
            detokenize(&candidate)
        })
        .collect()
}

pub struct EdaAugmenter {
    pub params: EdaParams,
    pub lexicon: SynonymLexicon,
}

impl EdaAugmenter {
    pub fn new(params: EdaParams, lexicon: SynonymLexicon) -> Self {
        EdaAugmenter { params, lexicon }
    }

    fn one(&self, text: &str, seed: u64) -> String {
        let params = EdaParams { n_aug: 1, seed, ..self.params };
        eda_augment(text, &params, &self.lexicon).remove(0)
    }
}

impl Augmenter for EdaAugmenter {
    fn method(&self) -> Source {
        Source::Eda
    }

    fn augment(&self, parent: &LabeledDocument, seed: u64) -> Result<Generated, AugmentError> {
        let explanation = if parent.explanation.trim().is_empty() {
            String::new()
        } else {
            self.one(&parent.explanation, rng::derive_seed(seed, "explanation", 0))
        };
        Ok(Generated { text: self.one(&parent.text, seed), explanation })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s)
    }

    fn lex(pairs: &[(&str, &[&str])]) -> SynonymLexicon {
        SynonymLexicon::new(pairs.iter().map(|(w, s)| (*w, s.iter().copied())))
    }

    #[test]
    fn replacement_noop_on_empty_lexicon() {
        let mut r = rng::seeded(1);
        let out = synonym_replacement(&toks("i feel tired"), 3, &SynonymLexicon::default(), &mut r);
        assert_eq!(detokenize(&out), "i feel tired");
    }

    #[test]
    fn replacement_single_outcome() {
        let mut r = rng::seeded(1);
        let out = synonym_replacement(&toks("i feel tired"), 1, &lex(&[("tired", &["exhausted"])]), &mut r);
        assert_eq!(detokenize(&out), "i feel exhausted");
    }

    #[test]
    fn replacement_deterministic() {
        let l = SynonymLexicon::starter();
        let input = toks("i feel tired and sad and alone at work");
        let first = synonym_replacement(&input, 3, &l, &mut rng::seeded(42));
        for _ in 0..100 {
            assert_eq!(synonym_replacement(&input, 3, &l, &mut rng::seeded(42)), first);
        }
    }

    #[test]
    fn insertion_cases() {
        let mut r = rng::seeded(3);
        assert_eq!(random_insertion(&toks("a b"), 2, &SynonymLexicon::default(), &mut r), toks("a b"));
        let out = detokenize(&random_insertion(&toks("a"), 1, &lex(&[("a", &["b"])]), &mut r));
        assert!(out == "b a" || out == "a b", "{out}");
    }

    #[test]
    fn swap_cases() {
        let mut r = rng::seeded(5);
        assert_eq!(detokenize(&random_swap(&toks("a b"), 1, &mut r)), "b a");
        assert_eq!(random_swap(&toks("x"), 7, &mut r), toks("x"));
        assert!(random_swap(&[], 2, &mut r).is_empty());
    }

    #[test]
    fn deletion_boundaries() {
        let mut r = rng::seeded(8);
        let input = toks("x y z");
        assert_eq!(random_deletion(&input, 0.0, &mut r), input);
        let out = random_deletion(&input, 1.0, &mut r);
        assert_eq!(out.len(), 1);
        assert!(input.contains(&out[0]));
    }

    #[test]
    fn augment_counts_and_determinism() {
        let l = SynonymLexicon::starter();
        let p = EdaParams { alpha: 0.2, n_aug: 4, seed: 17, compose: false };
        let a = eda_augment("I feel so tired after work every day.", &p, &l);
        assert_eq!(a.len(), 4);
        assert_eq!(a, eda_augment("I feel so tired after work every day.", &p, &l));
    }

    #[test]
    fn augment_prefers_changed_variants() {
        let l = SynonymLexicon::starter();
        let p = EdaParams { alpha: 0.1, n_aug: 8, seed: 2, compose: false };
        let text = "my friends never call me anymore";
        for v in eda_augment(text, &p, &l) {
            assert_ne!(v, detokenize(&toks(text)));
        }
    }

    #[test]
    fn zero_alpha_empty_lexicon_keeps_size() {
        let p = EdaParams { alpha: 0.0, n_aug: 6, seed: 1, compose: false };
        for v in eda_augment("one two three four", &p, &SynonymLexicon::default()) {
            assert_eq!(toks(&v).len(), 4);
        }
    }

    #[test]
    fn compose_mode_runs() {
        let p = EdaParams { alpha: 0.3, n_aug: 2, seed: 1, compose: true };
        let v = eda_augment("i feel tired and sad today", &p, &SynonymLexicon::starter());
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn lexicon_normalization() {
        let l = lex(&[("Tired", &["TIRED", "Weary", "weary"]), ("x", &[])]);
        assert_eq!(l.synonyms("tired"), ["weary"]);
        assert!(l.synonyms("x").is_empty());
        assert!(l.synonyms("absent").is_empty());
        assert_eq!(l.len(), 1);
        assert!(SynonymLexicon::starter().len() > 50);
    }

    #[test]
    fn params_validation() {
        assert!(EdaParams::default().validate().is_ok());
        assert!(EdaParams { alpha: 1.5, ..Default::default() }.validate().is_err());
        assert!(EdaParams { n_aug: 0, ..Default::default() }.validate().is_err());
        assert_eq!(EdaParams { alpha: 0.1, ..Default::default() }.edits_for(25), 3);
        assert_eq!(EdaParams { alpha: 0.0, ..Default::default() }.edits_for(25), 1);
    }
}
