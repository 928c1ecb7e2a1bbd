//! Labeled corpora: JSONL load/store and seeded stratified splitting.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::label::Label;
use crate::rng;

/// How a record came to exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    #[default]
    Original,
    Eda,
    Bt,
    Llm,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Original => "original",
            Source::Eda => "eda",
            Source::Bt => "bt",
            Source::Llm => "llm",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "original" => Ok(Source::Original),
            "eda" => Ok(Source::Eda),
            "bt" => Ok(Source::Bt),
            "llm" => Ok(Source::Llm),
            other => Err(format!("unknown source {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledDocument {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub explanation: String,
    pub label: Label,
    #[serde(default)]
    pub source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<String>,
}

impl LabeledDocument {
    pub fn original(id: impl Into<String>, text: impl Into<String>, explanation: impl Into<String>, label: Label) -> Self {
        LabeledDocument {
            id: id.into(),
            text: text.into(),
            explanation: explanation.into(),
            label,
            source: Source::Original,
            parent_id: None,
        }
    }

    fn check(&self) -> Result<(), String> {
        if self.id.is_empty() {
            return Err("empty id".into());
        }
        if self.text.trim().is_empty() {
            return Err(format!("record {:?} has empty text", self.id));
        }
        match (self.source, &self.parent_id) {
            (Source::Original, Some(_)) => Err(format!("original record {:?} must not carry parent_id", self.id)),
            (s, None) if s != Source::Original => Err(format!("{s} record {:?} is missing parent_id", self.id)),
            _ => Ok(()),
        }
    }
}

// Wire form: label kept as a string so unknown values can be reported verbatim.
#[derive(Deserialize)]
struct RawRecord {
    id: String,
    text: String,
    #[serde(default)]
    explanation: String,
    label: String,
    #[serde(default)]
    source: Option<String>,
    #[serde(default)]
    parent_id: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unknown label {value:?}")]
    UnknownLabel { line: usize, value: String },
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("invalid record: {0}")]
    Invalid(String),
    #[error("class {label} has {count} records, need more than {per_class_test} for the test split")]
    ClassTooSmall { label: Label, count: usize, per_class_test: usize },
    #[error("split requires original records only, found {source_kind} record {id:?}")]
    NotOriginal { id: String, source_kind: Source },
    #[error("{0}")]
    BadArgument(String),
}

/// Ordered collection of records with unique ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabeledCorpus {
    documents: Vec<LabeledDocument>,
    class_counts: [usize; Label::COUNT],
}

impl LabeledCorpus {
    pub fn new(documents: Vec<LabeledDocument>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::with_capacity(documents.len());
        let mut class_counts = [0; Label::COUNT];
        for d in &documents {
            d.check().map_err(CorpusError::Invalid)?;
            if !seen.insert(d.id.as_str()) {
                return Err(CorpusError::DuplicateId(d.id.clone()));
            }
            class_counts[d.label.index()] += 1;
        }
        Ok(LabeledCorpus { documents, class_counts })
    }

    pub fn documents(&self) -> &[LabeledDocument] {
        &self.documents
    }

    pub fn into_documents(self) -> Vec<LabeledDocument> {
        self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Per-class counts in [`Label::ALL`] order.
    pub fn class_counts(&self) -> [usize; Label::COUNT] {
        self.class_counts
    }

    pub fn count(&self, label: Label) -> usize {
        self.class_counts[label.index()]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledDocument> {
        self.documents.iter()
    }

    pub fn get(&self, id: &str) -> Option<&LabeledDocument> {
        self.documents.iter().find(|d| d.id == id)
    }

    pub fn by_id(&self) -> BTreeMap<&str, &LabeledDocument> {
        self.documents.iter().map(|d| (d.id.as_str(), d)).collect()
    }

    pub fn of_class(&self, label: Label) -> impl Iterator<Item = &LabeledDocument> {
        self.documents.iter().filter(move |d| d.label == label)
    }

    /// Labels with at least one record, in fixed order.
    pub fn present_labels(&self) -> Vec<Label> {
        Label::ALL.into_iter().filter(|l| self.count(*l) > 0).collect()
    }

    fn subset(&self, keep: impl Fn(usize) -> bool) -> LabeledCorpus {
        let docs = self
            .documents
            .iter()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .map(|(_, d)| d.clone())
            .collect();
        LabeledCorpus::new(docs).expect("subset of a valid corpus is valid")
    }
}

impl<'a> IntoIterator for &'a LabeledCorpus {
    type Item = &'a LabeledDocument;
    type IntoIter = std::slice::Iter<'a, LabeledDocument>;

    fn into_iter(self) -> Self::IntoIter {
        self.documents.iter()
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io { path: path.to_path_buf(), source }
}

pub fn parse_record(line: &str, line_no: usize) -> Result<LabeledDocument, CorpusError> {
    let raw: RawRecord = serde_json::from_str(line).map_err(|e| CorpusError::Malformed {
        line: line_no,
        message: e.to_string(),
    })?;
    let label = raw.label.parse::<Label>().map_err(|_| CorpusError::UnknownLabel {
        line: line_no,
        value: raw.label.clone(),
    })?;
    let source = match raw.source.as_deref() {
        None => Source::Original,
        Some(s) => s.parse().map_err(|message| CorpusError::Malformed { line: line_no, message })?,
    };
    let doc = LabeledDocument {
        id: raw.id,
        text: raw.text,
        explanation: raw.explanation,
        label,
        source,
        parent_id: raw.parent_id,
    };
    doc.check().map_err(|message| CorpusError::Malformed { line: line_no, message })?;
    Ok(doc)
}

/// Read a JSONL corpus. Blank lines are skipped; line numbers are 1-based.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<LabeledCorpus, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc = parse_record(&line, i + 1)?;
        if !seen.insert(doc.id.clone()) {
            return Err(CorpusError::DuplicateId(doc.id));
        }
        docs.push(doc);
    }
    LabeledCorpus::new(docs)
}

pub fn write_corpus(corpus: &LabeledCorpus, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    for d in corpus {
        let line = serde_json::to_string(d).expect("records always serialize");
        writeln!(w, "{line}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Carve `per_class_test` records of every class into a test set.
///
/// Selection is seeded uniform sampling without replacement per class,
/// classes visited in fixed label order; both sides keep corpus order.
pub fn stratified_split(
    corpus: &LabeledCorpus,
    per_class_test: usize,
    seed: u64,
) -> Result<(LabeledCorpus, LabeledCorpus), CorpusError> {
    if per_class_test == 0 {
        return Err(CorpusError::BadArgument("per_class_test must be positive".into()));
    }
    if let Some(d) = corpus.iter().find(|d| d.source != Source::Original) {
        return Err(CorpusError::NotOriginal { id: d.id.clone(), source_kind: d.source });
    }
    for label in Label::ALL {
        let count = corpus.count(label);
        if count <= per_class_test {
            return Err(CorpusError::ClassTooSmall { label, count, per_class_test });
        }
    }
    let in_test = select_per_class(corpus, |_, _| per_class_test, seed);
    Ok((corpus.subset(|i| !in_test[i]), corpus.subset(|i| in_test[i])))
}

fn select_per_class(corpus: &LabeledCorpus, take: impl Fn(Label, usize) -> usize, seed: u64) -> Vec<bool> {
    let mut rng = rng::seeded(seed);
    let mut chosen = vec![false; corpus.len()];
    for label in Label::ALL {
        let positions: Vec<usize> = corpus
            .documents
            .iter()
            .enumerate()
            .filter(|(_, d)| d.label == label)
            .map(|(i, _)| i)
            .collect();
        let k = take(label, positions.len()).min(positions.len());
        for j in index::sample(&mut rng, positions.len(), k) {
            chosen[positions[j]] = true;
        }
    }
    chosen
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ValidationMode {
    #[default]
    Stratified,
    Uniform,
}

impl fmt::Display for ValidationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValidationMode::Stratified => "stratified",
            ValidationMode::Uniform => "uniform",
        })
    }
}

/// Hold out `fraction` of a training corpus for validation.
///
/// Stratified mode takes `round(fraction * n_class)` per class, uniform
/// mode takes `round(fraction * n)` records regardless of class. Returns
/// `(fit, validation)`.
pub fn validation_split(
    corpus: &LabeledCorpus,
    fraction: f64,
    mode: ValidationMode,
    seed: u64,
) -> Result<(LabeledCorpus, LabeledCorpus), CorpusError> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(CorpusError::BadArgument(format!("validation fraction {fraction} outside [0, 1)")));
    }
    let chosen = match mode {
        ValidationMode::Stratified => {
            select_per_class(corpus, |_, n| (fraction * n as f64).round() as usize, seed)
        }
        ValidationMode::Uniform => {
            let mut rng = rng::seeded(seed);
            let k = (fraction * corpus.len() as f64).round() as usize;
            let mut chosen = vec![false; corpus.len()];
            for j in index::sample(&mut rng, corpus.len(), k.min(corpus.len())) {
                chosen[j] = true;
            }
            chosen
        }
    };
    Ok((corpus.subset(|i| !chosen[i]), corpus.subset(|i| chosen[i])))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, label: Label) -> LabeledDocument {
        LabeledDocument::original(id, format!("text of {id}"), "", label)
    }

    fn write_lines(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    #[test]
    fn loads_one_per_class() {
        let f = write_lines(&[
            r#"{"id":"1","text":"a","label":"PA"}"#,
            r#"{"id":"2","text":"b","label":"IVA","explanation":"x"}"#,
            r#"{"id":"3","text":"c","label":"SA","source":"original"}"#,
            r#"{"id":"4","text":"d","label":"SEA"}"#,
        ]);
        let c = load_corpus(f.path()).unwrap();
        assert_eq!(c.class_counts(), [1, 1, 1, 1]);
        assert_eq!(c.documents()[1].explanation, "x");
        assert_eq!(c.documents()[0].id, "1");
    }

    #[test]
    fn empty_file_loads_empty() {
        let f = write_lines(&[]);
        let c = load_corpus(f.path()).unwrap();
        assert!(c.is_empty());
        assert_eq!(c.class_counts(), [0; 4]);
    }

    #[test]
    fn unknown_label_names_line_and_value() {
        let f = write_lines(&[
            r#"{"id":"1","text":"a","label":"PA"}"#,
            r#"{"id":"2","text":"b","label":"SA"}"#,
            r#"{"id":"3","text":"c","label":"XX"}"#,
        ]);
        let msg = load_corpus(f.path()).unwrap_err().to_string();
        assert!(msg.contains("line 3"), "{msg}");
        assert!(msg.contains("XX"), "{msg}");
    }

    #[test]
    fn malformed_line_is_reported() {
        let f = write_lines(&[r#"{"id":"1","text":"a","label":"PA"}"#, "{not json"]);
        let err = load_corpus(f.path()).unwrap_err();
        assert!(matches!(err, CorpusError::Malformed { line: 2, .. }), "{err}");
    }

    #[test]
    fn duplicate_ids_rejected() {
        let f = write_lines(&[
            r#"{"id":"1","text":"a","label":"PA"}"#,
            r#"{"id":"1","text":"b","label":"SA"}"#,
        ]);
        assert!(matches!(load_corpus(f.path()), Err(CorpusError::DuplicateId(id)) if id == "1"));
    }

    #[test]
    fn empty_text_rejected() {
        let f = write_lines(&[r#"{"id":"1","text":"   ","label":"PA"}"#]);
        assert!(matches!(load_corpus(f.path()), Err(CorpusError::Malformed { line: 1, .. })));
    }

    #[test]
    fn parent_id_must_match_source() {
        let f = write_lines(&[r#"{"id":"1","text":"a","label":"PA","source":"eda"}"#]);
        assert!(load_corpus(f.path()).is_err());
        let f = write_lines(&[r#"{"id":"1","text":"a","label":"PA","parent_id":"0"}"#]);
        assert!(load_corpus(f.path()).is_err());
    }

    #[test]
    fn write_then_load_round_trips() {
        let mut d3 = doc("c", Label::SEA);
        d3.source = Source::Llm;
        d3.parent_id = Some("a".into());
        d3.explanation = "because \"quoted\"\nnewline".into();
        let c = LabeledCorpus::new(vec![doc("a", Label::PA), doc("b", Label::SA), d3]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.jsonl");
        write_corpus(&c, &p).unwrap();
        assert_eq!(load_corpus(&p).unwrap(), c);
    }

    #[test]
    fn write_empty_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.jsonl");
        write_corpus(&LabeledCorpus::default(), &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "");
        assert!(load_corpus(&p).unwrap().is_empty());
    }

    #[test]
    fn unwritable_path_names_path() {
        let p = Path::new("/nonexistent-dir-for-test/out.jsonl");
        let msg = write_corpus(&LabeledCorpus::default(), p).unwrap_err().to_string();
        assert!(msg.contains("/nonexistent-dir-for-test/out.jsonl"), "{msg}");
    }

    fn two_per_class() -> LabeledCorpus {
        let docs = Label::ALL
            .iter()
            .flat_map(|l| (0..2).map(move |i| doc(&format!("{l}-{i}"), *l)))
            .collect();
        LabeledCorpus::new(docs).unwrap()
    }

    #[test]
    fn split_one_per_class() {
        let (train, test) = stratified_split(&two_per_class(), 1, 3).unwrap();
        assert_eq!(train.class_counts(), [1; 4]);
        assert_eq!(test.class_counts(), [1; 4]);
    }

    #[test]
    fn split_is_deterministic() {
        let c = two_per_class();
        assert_eq!(stratified_split(&c, 1, 9).unwrap(), stratified_split(&c, 1, 9).unwrap());
    }

    #[test]
    fn split_rejects_small_class() {
        let err = stratified_split(&two_per_class(), 2, 0).unwrap_err();
        assert!(matches!(err, CorpusError::ClassTooSmall { label: Label::PA, .. }));
        assert!(err.to_string().contains("PA"));
    }

    #[test]
    fn split_reference_composition() {
        let counts = [740, 592, 1139, 621];
        let docs = Label::ALL
            .iter()
            .zip(counts)
            .flat_map(|(l, n)| (0..n).map(move |i| doc(&format!("{l}-{i}"), *l)))
            .collect();
        let c = LabeledCorpus::new(docs).unwrap();
        let (train, test) = stratified_split(&c, 45, 2023).unwrap();
        assert_eq!(test.len(), 180);
        assert_eq!(train.class_counts(), [695, 547, 1094, 576]);
    }

    #[test]
    fn validation_modes() {
        let docs = Label::ALL
            .iter()
            .flat_map(|l| (0..10).map(move |i| doc(&format!("{l}-{i}"), *l)))
            .collect();
        let c = LabeledCorpus::new(docs).unwrap();
        let (fit, val) = validation_split(&c, 0.2, ValidationMode::Stratified, 1).unwrap();
        assert_eq!(val.class_counts(), [2; 4]);
        assert_eq!(fit.len(), 32);
        let (fit, val) = validation_split(&c, 0.2, ValidationMode::Uniform, 1).unwrap();
        assert_eq!(val.len(), 8);
        assert_eq!(fit.len(), 32);
    }
}
