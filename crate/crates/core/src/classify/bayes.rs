use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ClassifyError;
use crate::corpus::LabeledCorpus;
use crate::label::Label;
use crate::par;
use crate::text::tokenize;

const K: usize = Label::COUNT;

/// Multinomial naive Bayes over bag-of-words counts with add-constant
/// smoothing. Vocabulary indices follow sorted token order, so the model
/// does not depend on the order of training documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BowModel {
    vocabulary: BTreeMap<String, usize>,
    /// `token_counts[class][token]`
    token_counts: Vec<Vec<u64>>,
    totals: [u64; K],
    doc_counts: [usize; K],
    priors: [f64; K],
    smoothing: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: Label,
    /// Indexed by [`Label::index`]; sums to 1.
    pub posterior: [f64; K],
}

pub fn train(corpus: &LabeledCorpus, smoothing: f64) -> Result<BowModel, ClassifyError> {
    if corpus.is_empty() {
        return Err(ClassifyError::EmptyCorpus);
    }
    if !(smoothing > 0.0 && smoothing.is_finite()) {
        return Err(ClassifyError::BadSmoothing(smoothing));
    }
    let tokenized: Vec<(Label, Vec<String>)> = corpus.iter().map(|d| (d.label, tokenize(&d.text))).collect();

    let mut vocabulary: BTreeMap<String, usize> = tokenized
        .iter()
        .flat_map(|(_, toks)| toks.iter().map(|t| (t.clone(), 0)))
        .collect();
    for (i, v) in vocabulary.values_mut().enumerate() {
        *v = i;
    }

    let mut token_counts = vec![vec![0u64; vocabulary.len()]; K];
    let mut totals = [0u64; K];
    let mut doc_counts = [0usize; K];
    for (label, toks) in &tokenized {
        let c = label.index();
        doc_counts[c] += 1;
        for t in toks {
            token_counts[c][vocabulary[t]] += 1;
            totals[c] += 1;
        }
    }
    let n = corpus.len() as f64;
    let priors = doc_counts.map(|d| d as f64 / n);
    Ok(BowModel { vocabulary, token_counts, totals, doc_counts, priors, smoothing })
}

/// Index of the largest score; ties go to the earlier class.
pub fn argmax(scores: &[f64; K]) -> usize {
    let mut best = 0;
    for i in 1..K {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    best
}

/// Normalized posterior from log-scores. Classes at `-inf` get 0.
pub fn posterior(scores: &[f64; K]) -> [f64; K] {
    let max = scores[argmax(scores)];
    let exp = scores.map(|s| if s == f64::NEG_INFINITY { 0.0 } else { (s - max).exp() });
    let z: f64 = exp.iter().sum();
    exp.map(|e| e / z)
}

impl BowModel {
    pub fn vocabulary_len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn priors(&self) -> &[f64; K] {
        &self.priors
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn labels_present(&self) -> Vec<Label> {
        Label::ALL.into_iter().filter(|l| self.doc_counts[l.index()] > 0).collect()
    }

    /// Smoothed `P(token | class)`; out-of-vocabulary tokens get the
    /// zero-count value.
    pub fn likelihood(&self, label: Label, token: &str) -> f64 {
        let c = label.index();
        let count = self.vocabulary.get(token).map_or(0, |&i| self.token_counts[c][i]);
        (count as f64 + self.smoothing) / (self.totals[c] as f64 + self.smoothing * self.vocabulary.len() as f64)
    }

    /// Log prior plus summed log likelihoods; classes unseen in training
    /// score `-inf`.
    pub fn log_scores(&self, text: &str) -> [f64; K] {
        let toks = tokenize(text);
        let mut scores = [f64::NEG_INFINITY; K];
        for label in Label::ALL {
            let c = label.index();
            if self.doc_counts[c] == 0 {
                continue;
            }
            scores[c] = self.priors[c].ln() + toks.iter().map(|t| self.likelihood(label, t).ln()).sum::<f64>();
        }
        scores
    }

    pub fn predict(&self, text: &str) -> Prediction {
        let scores = self.log_scores(text);
        Prediction {
            label: Label::from_index(argmax(&scores)).expect("index in range"),
            posterior: posterior(&scores),
        }
    }

    pub fn predict_batch(&self, texts: &[&str]) -> Vec<Prediction> {
        par::map(texts, |t| self.predict(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LabeledDocument;

    fn corpus(docs: &[(&str, Label)]) -> LabeledCorpus {
        LabeledCorpus::new(
            docs.iter()
                .enumerate()
                .map(|(i, (t, l))| LabeledDocument::original(i.to_string(), *t, "", *l))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn hand_computed_likelihoods() {
        let m = train(&corpus(&[("x x", Label::PA), ("y", Label::IVA)]), 1.0).unwrap();
        // (2+1)/(2+2) and (0+1)/(1+2)
        assert!((m.likelihood(Label::PA, "x") - 0.75).abs() < 1e-12);
        assert!((m.likelihood(Label::IVA, "x") - 1.0 / 3.0).abs() < 1e-12);
        assert!((m.likelihood(Label::PA, "zzz") - 0.25).abs() < 1e-12);
        assert_eq!(m.predict("x").label, Label::PA);
        assert_eq!(m.predict("y").label, Label::IVA);
    }

    #[test]
    fn single_class_always_predicted() {
        let m = train(&corpus(&[("a b", Label::SEA), ("c", Label::SEA)]), 1.0).unwrap();
        for t in ["a", "zzz", "", "c c c"] {
            let p = m.predict(t);
            assert_eq!(p.label, Label::SEA);
            assert_eq!(p.posterior[Label::SEA.index()], 1.0);
        }
        assert_eq!(m.labels_present(), [Label::SEA]);
    }

    #[test]
    fn order_independent() {
        let docs = [("a b c", Label::PA), ("b d", Label::SA), ("c c e", Label::IVA), ("f", Label::SEA), ("a f", Label::SA)];
        let mut rev = docs;
        rev.reverse();
        assert_eq!(train(&corpus(&docs), 0.5).unwrap(), train(&corpus(&rev), 0.5).unwrap());
    }

    #[test]
    fn empty_text_uses_prior() {
        let mut docs = vec![("a", Label::SA); 9];
        docs.push(("b", Label::PA));
        let m = train(&corpus(&docs), 1.0).unwrap();
        let p = m.predict("");
        assert_eq!(p.label, Label::SA);
        assert!((p.posterior[Label::SA.index()] - 0.9).abs() < 1e-12);
    }

    #[test]
    fn posterior_normalized() {
        let m = train(&corpus(&[("a b", Label::PA), ("b c", Label::IVA), ("c d", Label::SA), ("d a", Label::SEA)]), 1.0).unwrap();
        for t in ["a", "b c d", "q", "a a a a a a a a"] {
            let s: f64 = m.predict(t).posterior.iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn argmax_shift_invariant_and_tie_order() {
        let s = [-3.0, -1.5, -1.5, -7.0];
        assert_eq!(argmax(&s), 1);
        for c in [-100.0, 0.0, 42.5] {
            assert_eq!(argmax(&s.map(|x| x + c)), 1);
            let (a, b) = (posterior(&s), posterior(&s.map(|x| x + c)));
            assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
        }
    }

    #[test]
    fn training_errors() {
        assert!(matches!(train(&LabeledCorpus::default(), 1.0), Err(ClassifyError::EmptyCorpus)));
        assert!(matches!(train(&corpus(&[("a", Label::PA)]), 0.0), Err(ClassifyError::BadSmoothing(_))));
    }

    #[test]
    fn batch_matches_single() {
        let m = train(&corpus(&[("a b", Label::PA), ("b c", Label::IVA)]), 1.0).unwrap();
        let texts = ["a", "c", "b", ""];
        let batch = m.predict_batch(&texts);
        for (t, p) in texts.iter().zip(batch) {
            assert_eq!(p, m.predict(t));
        }
    }
}
