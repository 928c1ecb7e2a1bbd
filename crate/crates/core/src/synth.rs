//! Deterministic synthetic four-class corpus for end-to-end checks.
//!
//! Every class has its own keyword vocabulary; all classes share a pool
//! of filler words, and a fraction of tokens leak in from other classes
//! so that the task is learnable but not trivially separable.

use rand::Rng;

use crate::corpus::{LabeledCorpus, LabeledDocument};
use crate::label::Label;
use crate::rng;

const KEYWORDS: [&[&str]; 4] = [
    &["sleep", "pain", "body", "sick", "tired", "headache", "weight", "eat", "food", "weak", "hurt", "exhausted"],
    &["work", "job", "school", "exam", "boss", "career", "money", "study", "grades", "teacher", "class", "fired"],
    &["friends", "family", "alone", "lonely", "people", "talk", "call", "partner", "parents", "relationship", "everyone", "nobody"],
    &["empty", "hopeless", "faith", "god", "purpose", "meaning", "soul", "pray", "guilt", "peace", "sad", "anxious"],
];

const FILLER: &[&str] = &[
    "the", "a", "and", "i", "feel", "really", "day", "just", "like", "know", "think", "get", "always", "never",
    "time", "still", "things", "much", "very", "want", "my", "it", "is", "so", "but", "now", "every", "even",
    "again", "today", "week", "life", "good", "bad", "hard", "help", "need", "try", "keep", "stop",
];

/// Share of tokens drawn from the document's own class keywords.
const OWN_KEYWORD_RATE: f64 = 0.22;
/// Share of tokens drawn from another class's keywords.
const CROSS_KEYWORD_RATE: f64 = 0.12;

/// Class sizes of the bundled corpus (`data/synthetic_corpus.jsonl`).
pub const BUNDLED_COUNTS: [usize; 4] = [400, 200, 100, 100];
pub const BUNDLED_SEED: u64 = 2023;

/// The bundled corpus, regenerated in memory.
pub fn bundled() -> LabeledCorpus {
    synthetic_corpus(BUNDLED_COUNTS, BUNDLED_SEED)
}

/// Counts in [`Label::ALL`] order. Ids are `syn-<label>-<n>`.
pub fn synthetic_corpus(counts: [usize; 4], seed: u64) -> LabeledCorpus {
    let mut r = rng::seeded(seed);
    let mut docs = Vec::with_capacity(counts.iter().sum());
    for label in Label::ALL {
        let own = KEYWORDS[label.index()];
        for n in 0..counts[label.index()] {
            let len = r.gen_range(8..=16);
            let mut tokens = Vec::with_capacity(len);
            let mut cues = Vec::new();
            for _ in 0..len {
                let u: f64 = r.gen();
                let word = if u < OWN_KEYWORD_RATE {
                    let w = own[r.gen_range(0..own.len())];
                    cues.push(w);
                    w
                } else if u < OWN_KEYWORD_RATE + CROSS_KEYWORD_RATE {
                    let other = (label.index() + r.gen_range(1..4)) % 4;
                    KEYWORDS[other][r.gen_range(0..KEYWORDS[other].len())]
                } else {
                    FILLER[r.gen_range(0..FILLER.len())]
                };
                tokens.push(word);
            }
            let explanation = cues.iter().take(3).copied().collect::<Vec<_>>().join(" ");
            docs.push(LabeledDocument::original(
                format!("syn-{}-{n}", label.code()),
                tokens.join(" "),
                explanation,
                label,
            ));
        }
    }
    LabeledCorpus::new(docs).expect("generated ids are unique")
}
