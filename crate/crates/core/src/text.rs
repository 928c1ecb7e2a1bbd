//! The one word tokenizer shared by augmentation, similarity scoring and
//! the classifier.

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(c, '\u{2010}'..='\u{2027}' | '\u{2030}'..='\u{205E}' | '\u{3001}'..='\u{3003}')
        || matches!(c, '«' | '»' | '¡' | '¿' | '·')
}

/// Lowercase, split on Unicode whitespace, strip leading and trailing
/// punctuation from each token. Tokens that are all punctuation vanish.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| t.trim_matches(is_punct).to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(t.as_ref());
    }
    out
}

/// Collapse whitespace runs, trim, casefold. Used for duplicate detection.
pub fn normalize_for_dedup(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_trailing_punctuation() {
        assert_eq!(tokenize("The cat sat."), ["the", "cat", "sat"]);
    }

    #[test]
    fn empty_text() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("  ... !! ").is_empty());
    }

    #[test]
    fn collapses_whitespace() {
        assert_eq!(tokenize("  a  b "), ["a", "b"]);
        assert_eq!(tokenize("a\tb\u{00A0}c\n"), ["a", "b", "c"]);
    }

    #[test]
    fn keeps_inner_apostrophe() {
        assert_eq!(tokenize("\"Don't\" stop…"), ["don't", "stop"]);
    }

    #[test]
    fn dedup_normalization() {
        assert_eq!(normalize_for_dedup("  Hello \n  World "), "hello world");
        assert_eq!(detokenize(&["a", "b"]), "a b");
    }
}
