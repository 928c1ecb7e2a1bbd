use std::collections::HashMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    pub fn from_counts(overlap: usize, candidate_total: usize, reference_total: usize) -> Self {
        if candidate_total == 0 || reference_total == 0 {
            return RougeScore::default();
        }
        let precision = overlap as f64 / candidate_total as f64;
        let recall = overlap as f64 / reference_total as f64;
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        RougeScore { precision, recall, f1 }
    }
}

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w.iter().map(AsRef::as_ref).collect()).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram overlap. `n` of 0 yields a zero score.
pub fn rouge_n<S: AsRef<str>>(candidate: &[S], reference: &[S], n: usize) -> RougeScore {
    if n == 0 {
        return RougeScore::default();
    }
    let cand = ngram_counts(candidate, n);
    let refc = ngram_counts(reference, n);
    let overlap = cand
        .iter()
        .map(|(g, c)| refc.get(g).map_or(0, |r| (*c).min(*r)))
        .sum();
    RougeScore::from_counts(
        overlap,
        (candidate.len() + 1).saturating_sub(n),
        (reference.len() + 1).saturating_sub(n),
    )
}

pub fn lcs_len<S: AsRef<str>>(a: &[S], b: &[S]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x.as_ref() == y.as_ref() {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn rouge_l<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> RougeScore {
    RougeScore::from_counts(lcs_len(candidate, reference), candidate.len(), reference.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    const RAN: [&str; 3] = ["the", "cat", "ran"];
    const SAT: [&str; 3] = ["the", "cat", "sat"];

    #[test]
    fn identical_sequences_score_one() {
        let t = ["a", "b", "c", "a"];
        assert_eq!(rouge_n(&t, &t, 1).f1, 1.0);
        assert_eq!(rouge_n(&t, &t, 2).f1, 1.0);
        assert_eq!(rouge_l(&t, &t).f1, 1.0);
    }

    #[test]
    fn disjoint_scores_zero() {
        assert_eq!(rouge_n(&["a", "b"], &["c", "d"], 1).f1, 0.0);
        assert_eq!(rouge_l(&["a", "b"], &["c", "d"]).f1, 0.0);
    }

    #[test]
    fn cat_example() {
        assert!((rouge_n(&RAN, &SAT, 1).f1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((rouge_n(&RAN, &SAT, 2).f1 - 0.5).abs() < 1e-12);
        assert_eq!(lcs_len(&RAN, &SAT), 2);
        assert!((rouge_l(&RAN, &SAT).f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_sides() {
        let empty: [&str; 0] = [];
        assert_eq!(rouge_l(&empty, &SAT), RougeScore::default());
        assert_eq!(rouge_n(&SAT, &empty, 1), RougeScore::default());
        // a single token has no bigrams
        assert_eq!(rouge_n(&["a"], &["a"], 2), RougeScore::default());
    }

    #[test]
    fn clipping() {
        // candidate repeats "the" three times, reference has it once
        let s = rouge_n(&["the", "the", "the"], &["the", "cat"], 1);
        assert!((s.precision - 1.0 / 3.0).abs() < 1e-12);
        assert!((s.recall - 0.5).abs() < 1e-12);
    }
}
