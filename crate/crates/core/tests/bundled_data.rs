use std::path::PathBuf;

use wdaug_core::corpus::{load_corpus, write_corpus};
use wdaug_core::synth;

fn bundled_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic_corpus.jsonl")
}

/// Set `WDAUG_REGENERATE=1` to rewrite the file after changing the generator.
#[test]
fn bundled_corpus_matches_generator() {
    let expected = synth::bundled();
    if std::env::var_os("WDAUG_REGENERATE").is_some() {
        write_corpus(&expected, bundled_path()).unwrap();
    }
    let on_disk = load_corpus(bundled_path()).unwrap();
    assert_eq!(on_disk.class_counts(), synth::BUNDLED_COUNTS);
    assert_eq!(on_disk, expected);
}
