//! Universal POS tags and a small rule-based tagger.
//!
//! The builtin tagger pairs a word lexicon with suffix and context rules. It is meant for
//! comparing tag *sets* between two sentences, not for high-accuracy
//! tagging; anything better can be plugged in through [`PosTagger`].

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::text::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Upos {
    Adj,
    Adp,
    Adv,
    Aux,
    Cconj,
    Det,
    Intj,
    Noun,
    Num,
    Part,
    Pron,
    Propn,
    Punct,
    Sconj,
    Sym,
    Verb,
    X,
}

impl fmt::Display for Upos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("tag serializes");
        f.write_str(s.as_str().unwrap_or("X"))
    }
}

pub trait PosTagger: Send + Sync {
    fn tag(&self, tokens: &[String]) -> Vec<Upos>;
}

const CLOSED: &[(&str, Upos)] = &[
    // determiners
    ("the", Upos::Det), ("a", Upos::Det), ("an", Upos::Det), ("this", Upos::Det), ("that", Upos::Det),
    ("these", Upos::Det), ("those", Upos::Det), ("every", Upos::Det), ("each", Upos::Det), ("some", Upos::Det),
    ("any", Upos::Det), ("no", Upos::Det), ("all", Upos::Det), ("my", Upos::Det), ("your", Upos::Det),
    ("his", Upos::Det), ("her", Upos::Det), ("its", Upos::Det), ("our", Upos::Det), ("their", Upos::Det),
    ("another", Upos::Det), ("such", Upos::Det), ("what", Upos::Det), ("which", Upos::Det),
    // pronouns
    ("i", Upos::Pron), ("me", Upos::Pron), ("you", Upos::Pron), ("he", Upos::Pron), ("him", Upos::Pron),
    ("she", Upos::Pron), ("it", Upos::Pron), ("we", Upos::Pron), ("us", Upos::Pron), ("they", Upos::Pron),
    ("them", Upos::Pron), ("myself", Upos::Pron), ("yourself", Upos::Pron), ("himself", Upos::Pron),
    ("herself", Upos::Pron), ("itself", Upos::Pron), ("ourselves", Upos::Pron), ("themselves", Upos::Pron),
    ("mine", Upos::Pron), ("yours", Upos::Pron), ("who", Upos::Pron), ("whom", Upos::Pron),
    ("someone", Upos::Pron), ("anyone", Upos::Pron), ("everyone", Upos::Pron), ("nobody", Upos::Pron),
    ("somebody", Upos::Pron), ("everybody", Upos::Pron), ("something", Upos::Pron), ("anything", Upos::Pron),
    ("nothing", Upos::Pron), ("everything", Upos::Pron), ("i'm", Upos::Pron), ("i've", Upos::Pron),
    ("i'll", Upos::Pron), ("i'd", Upos::Pron), ("it's", Upos::Pron), ("they're", Upos::Pron),
    ("you're", Upos::Pron), ("we're", Upos::Pron), ("he's", Upos::Pron), ("she's", Upos::Pron),
    // adpositions
    ("in", Upos::Adp), ("on", Upos::Adp), ("at", Upos::Adp), ("by", Upos::Adp), ("for", Upos::Adp),
    ("with", Upos::Adp), ("about", Upos::Adp), ("against", Upos::Adp), ("between", Upos::Adp),
    ("into", Upos::Adp), ("through", Upos::Adp), ("during", Upos::Adp), ("before", Upos::Adp),
    ("after", Upos::Adp), ("above", Upos::Adp), ("below", Upos::Adp), ("from", Upos::Adp), ("up", Upos::Adp),
    ("down", Upos::Adp), ("of", Upos::Adp), ("off", Upos::Adp), ("over", Upos::Adp), ("under", Upos::Adp),
    ("without", Upos::Adp), ("within", Upos::Adp), ("since", Upos::Adp), ("like", Upos::Adp),
    ("around", Upos::Adp), ("to", Upos::Adp), ("across", Upos::Adp), ("toward", Upos::Adp),
    // conjunctions
    ("and", Upos::Cconj), ("or", Upos::Cconj), ("but", Upos::Cconj), ("nor", Upos::Cconj), ("yet", Upos::Cconj),
    ("so", Upos::Cconj), ("because", Upos::Sconj), ("if", Upos::Sconj), ("while", Upos::Sconj),
    ("although", Upos::Sconj), ("though", Upos::Sconj), ("unless", Upos::Sconj), ("whether", Upos::Sconj),
    ("when", Upos::Sconj), ("until", Upos::Sconj), ("as", Upos::Sconj), ("than", Upos::Sconj),
    // auxiliaries
    ("am", Upos::Aux), ("is", Upos::Aux), ("are", Upos::Aux), ("was", Upos::Aux), ("were", Upos::Aux),
    ("be", Upos::Aux), ("been", Upos::Aux), ("being", Upos::Aux), ("have", Upos::Aux), ("has", Upos::Aux),
    ("had", Upos::Aux), ("do", Upos::Aux), ("does", Upos::Aux), ("did", Upos::Aux), ("will", Upos::Aux),
    ("would", Upos::Aux), ("shall", Upos::Aux), ("should", Upos::Aux), ("can", Upos::Aux), ("could", Upos::Aux),
    ("may", Upos::Aux), ("might", Upos::Aux), ("must", Upos::Aux), ("can't", Upos::Aux), ("cannot", Upos::Aux),
    ("don't", Upos::Aux), ("doesn't", Upos::Aux), ("didn't", Upos::Aux), ("won't", Upos::Aux),
    ("wouldn't", Upos::Aux), ("couldn't", Upos::Aux), ("shouldn't", Upos::Aux), ("isn't", Upos::Aux),
    ("aren't", Upos::Aux), ("wasn't", Upos::Aux), ("weren't", Upos::Aux), ("haven't", Upos::Aux),
    ("hasn't", Upos::Aux), ("hadn't", Upos::Aux),
    // particles, interjections
    ("not", Upos::Part), ("n't", Upos::Part), ("'s", Upos::Part),
    ("oh", Upos::Intj), ("yes", Upos::Intj), ("hello", Upos::Intj), ("hi", Upos::Intj), ("wow", Upos::Intj),
    ("ugh", Upos::Intj), ("please", Upos::Intj), ("okay", Upos::Intj), ("ok", Upos::Intj),
    // numbers
    ("one", Upos::Num), ("two", Upos::Num), ("three", Upos::Num), ("four", Upos::Num), ("five", Upos::Num),
    ("six", Upos::Num), ("seven", Upos::Num), ("eight", Upos::Num), ("nine", Upos::Num), ("ten", Upos::Num),
    ("hundred", Upos::Num), ("thousand", Upos::Num),
];

const VERBS: &[&str] = &[
    "feel", "felt", "think", "thought", "know", "knew", "want", "wanted", "need", "get", "got", "go", "went",
    "gone", "make", "made", "take", "took", "see", "saw", "seen", "come", "came", "say", "said", "tell", "told",
    "give", "gave", "find", "found", "try", "tried", "leave", "left", "call", "keep", "kept", "let", "begin",
    "began", "seem", "help", "talk", "turn", "start", "show", "hear", "heard", "play", "run", "ran", "move",
    "live", "believe", "hold", "bring", "brought", "happen", "write", "wrote", "sit", "sat", "stand", "stood",
    "lose", "lost", "pay", "paid", "meet", "met", "learn", "change", "lead", "understand", "understood", "watch",
    "follow", "stop", "speak", "spoke", "read", "spend", "spent", "grow", "open", "walk", "win", "offer",
    "remember", "love", "hate", "consider", "appear", "buy", "wait", "serve", "die", "send", "expect", "build",
    "stay", "fall", "fell", "cut", "reach", "kill", "remain", "suggest", "raise", "pass", "sell", "require",
    "decide", "pull", "cry", "sleep", "slept", "eat", "ate", "drink", "hurt", "fail", "quit", "work", "study",
    "pray", "hope", "wish", "worry", "miss", "care", "fight", "cope", "ache", "struggle", "sleep", "wake",
    "woke", "breathe", "exercise", "look", "put", "ask", "feels", "gets", "makes", "goes", "wants", "needs",
    "thinks", "knows", "runs", "sleeps",
];

const ADJECTIVES: &[&str] = &[
    "good", "bad", "new", "old", "great", "high", "small", "large", "big", "long", "little", "young", "important",
    "few", "public", "same", "able", "happy", "sad", "tired", "lonely", "alone", "sick", "ill", "weak", "strong",
    "hard", "easy", "empty", "afraid", "scared", "angry", "anxious", "worried", "depressed", "stressed", "free",
    "real", "whole", "sure", "better", "best", "worse", "worst", "last", "next", "other", "own", "only", "true",
    "full", "close", "dark", "right", "wrong", "fine", "nice", "awful", "terrible", "horrible", "exhausted",
    "numb", "lost", "broken", "ugly", "fat", "thin", "poor", "rich", "low", "deep", "quiet", "busy", "late",
    "early", "hopeless", "worthless", "useless", "miserable", "overwhelmed", "isolated", "unemployed", "much",
    "many", "more", "most", "less", "least", "several",
];

const ADVERBS: &[&str] = &[
    "very", "really", "just", "also", "too", "now", "then", "here", "there", "always", "never", "often",
    "sometimes", "still", "even", "again", "ever", "already", "almost", "anymore", "away", "back", "maybe",
    "perhaps", "soon", "today", "tonight", "yesterday", "tomorrow", "well", "only", "quite", "rather",
    "together", "everywhere", "somewhere", "anywhere", "why", "how", "where", "once", "far", "instead",
];

fn lexicon() -> &'static HashMap<&'static str, Upos> {
    static LEX: OnceLock<HashMap<&'static str, Upos>> = OnceLock::new();
    LEX.get_or_init(|| {
        let mut m = HashMap::new();
        for w in VERBS {
            m.insert(*w, Upos::Verb);
        }
        for w in ADJECTIVES {
            m.insert(*w, Upos::Adj);
        }
        for w in ADVERBS {
            m.insert(*w, Upos::Adv);
        }
        for (w, t) in CLOSED {
            m.insert(*w, *t);
        }
        m
    })
}

fn by_suffix(word: &str) -> Option<Upos> {
    const RULES: &[(&str, Upos)] = &[
        ("ly", Upos::Adv),
        ("ing", Upos::Verb),
        ("ed", Upos::Verb),
        ("ize", Upos::Verb),
        ("ise", Upos::Verb),
        ("ify", Upos::Verb),
        ("ness", Upos::Noun),
        ("ment", Upos::Noun),
        ("tion", Upos::Noun),
        ("sion", Upos::Noun),
        ("ity", Upos::Noun),
        ("ship", Upos::Noun),
        ("ance", Upos::Noun),
        ("ence", Upos::Noun),
        ("ism", Upos::Noun),
        ("ist", Upos::Noun),
        ("ous", Upos::Adj),
        ("ful", Upos::Adj),
        ("less", Upos::Adj),
        ("able", Upos::Adj),
        ("ible", Upos::Adj),
        ("ive", Upos::Adj),
        ("ic", Upos::Adj),
        ("ish", Upos::Adj),
        ("al", Upos::Adj),
    ];
    if word.chars().count() < 4 {
        return None;
    }
    RULES.iter().find(|(suf, _)| word.ends_with(suf)).map(|(_, t)| *t)
}

fn is_number(word: &str) -> bool {
    word.chars().any(|c| c.is_ascii_digit())
        && word.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | ',' | '%' | '/' | ':'))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RuleTagger;

impl PosTagger for RuleTagger {
    fn tag(&self, tokens: &[String]) -> Vec<Upos> {
        let lex = lexicon();
        let mut tags: Vec<Option<Upos>> = tokens
            .iter()
            .map(|t| {
                if is_number(t) {
                    Some(Upos::Num)
                } else if t.chars().all(|c| !c.is_alphanumeric()) {
                    Some(Upos::Punct)
                } else {
                    lex.get(t.as_str()).copied()
                }
            })
            .collect();
        // "to" before a known verb is the infinitive particle
        for i in 0..tokens.len().saturating_sub(1) {
            if tokens[i] == "to" && tags[i + 1] == Some(Upos::Verb) {
                tags[i] = Some(Upos::Part);
            }
        }
        let mut out = Vec::with_capacity(tokens.len());
        for (i, tok) in tokens.iter().enumerate() {
            let tag = tags[i].unwrap_or_else(|| {
                let prev = out.last().copied();
                match prev {
                    Some(Upos::Pron) | Some(Upos::Aux) | Some(Upos::Part) if by_suffix(tok).is_none() => Upos::Verb,
                    _ => by_suffix(tok).unwrap_or(Upos::Noun),
                }
            });
            out.push(tag);
        }
        out
    }
}

/// `|a ∩ b| / |a ∪ b|`; two empty sets count as identical.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

pub fn tag_set(text: &str, tagger: &dyn PosTagger) -> BTreeSet<Upos> {
    tagger.tag(&tokenize(text)).into_iter().collect()
}

/// Jaccard overlap of the POS tag sets of two sentences.
pub fn pos_overlap(a: &str, b: &str, tagger: &dyn PosTagger) -> f64 {
    jaccard(&tag_set(a, tagger), &tag_set(b, tagger))
}
