//! Per-pair similarity rows and per-method means.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::embed::{cosine, EmbeddingProvider};
use super::pos::{pos_overlap, PosTagger};
use super::rouge::{rouge_l, rouge_n};
use crate::corpus::{LabeledCorpus, LabeledDocument, Source};
use crate::par;
use crate::text::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Text,
    Explanation,
}

impl Field {
    pub fn as_str(self) -> &'static str {
        match self {
            Field::Text => "text",
            Field::Explanation => "explanation",
        }
    }
}

/// An augmented record and the original it was generated from.
#[derive(Debug, Clone, Copy)]
pub struct Pair<'a> {
    /// Summary key; usually the generation method.
    pub group: &'a str,
    pub original: &'a LabeledDocument,
    pub augmented: &'a LabeledDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub pair_id: String,
    pub parent_id: String,
    pub group: String,
    pub field: Field,
    pub rouge1: f64,
    pub rouge2: f64,
    pub rouge_l: f64,
    /// One entry per provider; `None` when the provider failed.
    pub semantic: Vec<Option<f64>>,
    pub syntactic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: String,
    pub field: Field,
    pub count: usize,
    pub rouge1: f64,
    pub rouge2: f64,
    pub rouge_l: f64,
    /// Mean cosine per provider over rows where it succeeded.
    pub semantic: BTreeMap<String, Option<f64>>,
    pub syntactic: f64,
}

impl GroupSummary {
    /// Mean over providers of the per-provider means.
    pub fn semantic_mean(&self) -> Option<f64> {
        mean(self.semantic.values().flatten().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub providers: Vec<String>,
    pub rows: Vec<PairRow>,
    pub summaries: Vec<GroupSummary>,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("nothing to compare: no generated records")]
    Empty,
    #[error("generated record {id:?} references missing parent {parent_id:?}")]
    MissingParent { id: String, parent_id: String },
    #[error("{path}: {message}")]
    Write { path: String, message: String },
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Pair every generated record with its parent. Records whose parent is
/// absent from `corpus` are an error. `group` overrides the method name.
pub fn pairs_from_corpus<'a>(corpus: &'a LabeledCorpus, group: Option<&'a str>) -> Result<Vec<Pair<'a>>, ReportError> {
    let by_id = corpus.by_id();
    corpus
        .iter()
        .filter(|d| d.source != Source::Original)
        .map(|d| {
            let parent_id = d.parent_id.as_deref().unwrap_or_default();
            let original = by_id.get(parent_id).copied().ok_or_else(|| ReportError::MissingParent {
                id: d.id.clone(),
                parent_id: parent_id.to_string(),
            })?;
            Ok(Pair { group: group.unwrap_or(d.source.as_str()), original, augmented: d })
        })
        .collect()
}

fn score(
    original: &str,
    augmented: &str,
    providers: &[&dyn EmbeddingProvider],
    tagger: &dyn PosTagger,
) -> (f64, f64, f64, Vec<Option<f64>>, f64) {
    let reference = tokenize(original);
    let candidate = tokenize(augmented);
    let semantic = providers
        .iter()
        .map(|p| {
            let pair = p.embed(original).and_then(|u| p.embed(augmented).map(|v| (u, v)));
            match pair {
                Ok((u, v)) => match cosine(&u, &v) {
                    Ok(c) => Some(c),
                    Err(e) => {
                        log::warn!("{}: cosine undefined: {e}", p.name());
                        None
                    }
                },
                Err(e) => {
                    log::warn!("{}: embedding failed: {e}", p.name());
                    None
                }
            }
        })
        .collect();
    (
        rouge_n(&candidate, &reference, 1).f1,
        rouge_n(&candidate, &reference, 2).f1,
        rouge_l(&candidate, &reference).f1,
        semantic,
        pos_overlap(original, augmented, tagger),
    )
}

/// One text row per pair, plus an explanation row wherever both sides
/// carry an explanation. Rows are scored in parallel.
pub fn similarity_report(
    pairs: &[Pair<'_>],
    providers: &[&dyn EmbeddingProvider],
    tagger: &dyn PosTagger,
) -> Result<SimilarityReport, ReportError> {
    if pairs.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut jobs: Vec<(Pair<'_>, Field)> = Vec::with_capacity(pairs.len() * 2);
    for p in pairs {
        jobs.push((*p, Field::Text));
    }
    for p in pairs {
        if !p.original.explanation.trim().is_empty() && !p.augmented.explanation.trim().is_empty() {
            jobs.push((*p, Field::Explanation));
        }
    }
    let rows: Vec<PairRow> = par::map(&jobs, |(p, field)| {
        let (a, b) = match field {
            Field::Text => (&p.original.text, &p.augmented.text),
            Field::Explanation => (&p.original.explanation, &p.augmented.explanation),
        };
        let (rouge1, rouge2, rouge_l, semantic, syntactic) = score(a, b, providers, tagger);
        PairRow {
            pair_id: p.augmented.id.clone(),
            parent_id: p.original.id.clone(),
            group: p.group.to_string(),
            field: *field,
            rouge1,
            rouge2,
            rouge_l,
            semantic,
            syntactic,
        }
    });

    let names: Vec<String> = providers.iter().map(|p| p.name().to_string()).collect();
    let mut grouped: BTreeMap<(String, Field), Vec<&PairRow>> = BTreeMap::new();
    for r in &rows {
        grouped.entry((r.group.clone(), r.field)).or_default().push(r);
    }
    let summaries = grouped
        .into_iter()
        .map(|((group, field), rs)| GroupSummary {
            count: rs.len(),
            rouge1: mean(rs.iter().map(|r| r.rouge1)).unwrap_or(0.0),
            rouge2: mean(rs.iter().map(|r| r.rouge2)).unwrap_or(0.0),
            rouge_l: mean(rs.iter().map(|r| r.rouge_l)).unwrap_or(0.0),
            semantic: names
                .iter()
                .enumerate()
                .map(|(k, n)| (n.clone(), mean(rs.iter().filter_map(|r| r.semantic[k]))))
                .collect(),
            syntactic: mean(rs.iter().map(|r| r.syntactic)).unwrap_or(0.0),
            group,
            field,
        })
        .collect();
    Ok(SimilarityReport { providers: names, rows, summaries })
}

fn write_err(path: &Path, e: impl std::fmt::Display) -> ReportError {
    ReportError::Write { path: path.display().to_string(), message: e.to_string() }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

impl SimilarityReport {
    pub fn summary(&self, group: &str, field: Field) -> Option<&GroupSummary> {
        self.summaries.iter().find(|s| s.group == group && s.field == field)
    }

    /// One row per pair and field; missing provider scores are empty cells.
    pub fn write_csv(&self, path: &Path) -> Result<(), ReportError> {
        let mut w = csv::Writer::from_path(path).map_err(|e| write_err(path, e))?;
        let mut header = vec!["pair_id", "parent_id", "method", "field", "rouge1_f", "rouge2_f", "rougeL_f"];
        let sem: Vec<String> = self.providers.iter().map(|p| format!("cosine:{p}")).collect();
        header.extend(sem.iter().map(String::as_str));
        header.push("pos_overlap");
        w.write_record(&header).map_err(|e| write_err(path, e))?;
        for r in &self.rows {
            let mut rec = vec![
                r.pair_id.clone(),
                r.parent_id.clone(),
                r.group.clone(),
                r.field.as_str().to_string(),
                format!("{:.6}", r.rouge1),
                format!("{:.6}", r.rouge2),
                format!("{:.6}", r.rouge_l),
            ];
            rec.extend(r.semantic.iter().map(|s| fmt_opt(*s)));
            rec.push(format!("{:.6}", r.syntactic));
            w.write_record(&rec).map_err(|e| write_err(path, e))?;
        }
        w.flush().map_err(|e| write_err(path, e))
    }

    pub fn write_summary_json(&self, path: &Path) -> Result<(), ReportError> {
        #[derive(Serialize)]
        struct Summary<'a> {
            providers: &'a [String],
            methods: &'a [GroupSummary],
        }
        let json = serde_json::to_string_pretty(&Summary { providers: &self.providers, methods: &self.summaries })
            .expect("summary serializes");
        std::fs::write(path, json + "\n").map_err(|e| write_err(path, e))
    }

    /// ROUGE means per method (text field only), one CSV row per method.
    pub fn rouge_series_csv(&self) -> String {
        let mut out = String::from("method,rouge1_f,rouge2_f,rougeL_f\n");
        for s in self.summaries.iter().filter(|s| s.field == Field::Text) {
            out.push_str(&format!("{},{:.6},{:.6},{:.6}\n", s.group, s.rouge1, s.rouge2, s.rouge_l));
        }
        out
    }

    /// Semantic and syntactic means per method and field.
    pub fn similarity_series_csv(&self) -> String {
        let mut out = String::from("method,field,semantic_cosine_mean,pos_overlap\n");
        for s in &self.summaries {
            out.push_str(&format!("{},{},{},{:.6}\n", s.group, s.field.as_str(), fmt_opt(s.semantic_mean()), s.syntactic));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::remote::RemoteError;
    use crate::similarity::{BuiltinEmbedder, RuleTagger};
    use crate::Label;

    fn doc(id: &str, text: &str, expl: &str, parent: Option<&str>, source: Source) -> LabeledDocument {
        LabeledDocument {
            id: id.into(),
            text: text.into(),
            explanation: expl.into(),
            label: Label::SA,
            source,
            parent_id: parent.map(Into::into),
        }
    }

    struct Broken;

    impl EmbeddingProvider for Broken {
        fn name(&self) -> &str {
            "broken"
        }

        fn embed(&self, _text: &str) -> Result<Vec<f64>, RemoteError> {
            Err(RemoteError::Transport("down".into()))
        }
    }

    #[test]
    fn identical_pairs_average_one() {
        let o = doc("o", "my friends never call me", "never call", None, Source::Original);
        let a = doc("a", "my friends never call me", "never call", Some("o"), Source::Eda);
        let pairs = [Pair { group: "eda", original: &o, augmented: &a }];
        let r = similarity_report(&pairs, &[&BuiltinEmbedder], &RuleTagger).unwrap();
        assert_eq!(r.rows.len(), 2);
        for field in [Field::Text, Field::Explanation] {
            let s = r.summary("eda", field).unwrap();
            assert_eq!((s.rouge1, s.rouge2, s.rouge_l, s.syntactic), (1.0, 1.0, 1.0, 1.0));
            assert!((s.semantic["builtin-trigram"].unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn means_are_arithmetic() {
        let o = doc("o", "alpha beta", "", None, Source::Original);
        let same = doc("a1", "alpha beta", "", Some("o"), Source::Eda);
        let other = doc("a2", "gamma delta", "", Some("o"), Source::Eda);
        let single = [Pair { group: "eda", original: &o, augmented: &other }];
        let r = similarity_report(&single, &[], &RuleTagger).unwrap();
        assert_eq!(r.summaries[0].rouge1, r.rows[0].rouge1);

        let pairs = [
            Pair { group: "eda", original: &o, augmented: &same },
            Pair { group: "eda", original: &o, augmented: &other },
        ];
        let r = similarity_report(&pairs, &[], &RuleTagger).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert_eq!(r.summary("eda", Field::Text).unwrap().rouge1, 0.5);
        assert!(r.summary("eda", Field::Explanation).is_none());
    }

    #[test]
    fn failed_provider_excluded_from_mean() {
        let o = doc("o", "alpha beta", "", None, Source::Original);
        let a = doc("a", "alpha gamma", "", Some("o"), Source::Bt);
        let pairs = [Pair { group: "bt", original: &o, augmented: &a }];
        let r = similarity_report(&pairs, &[&BuiltinEmbedder, &Broken], &RuleTagger).unwrap();
        assert_eq!(r.rows[0].semantic[1], None);
        assert!(r.rows[0].semantic[0].is_some());
        assert_eq!(r.summaries[0].semantic["broken"], None);
    }

    #[test]
    fn groups_by_method() {
        let o = doc("o", "alpha beta", "", None, Source::Original);
        let a = doc("a", "alpha gamma", "", Some("o"), Source::Bt);
        let b = doc("b", "beta alpha", "", Some("o"), Source::Eda);
        let c = LabeledCorpus::new(vec![o, a, b]).unwrap();
        let pairs = pairs_from_corpus(&c, None).unwrap();
        let r = similarity_report(&pairs, &[], &RuleTagger).unwrap();
        let groups: Vec<_> = r.summaries.iter().map(|s| s.group.as_str()).collect();
        assert_eq!(groups, ["bt", "eda"]);
        assert!(r.rouge_series_csv().starts_with("method,rouge1_f,rouge2_f,rougeL_f\nbt,"));
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(similarity_report(&[], &[], &RuleTagger), Err(ReportError::Empty)));
    }

    #[test]
    fn csv_and_json_written() {
        let o = doc("o", "alpha beta", "", None, Source::Original);
        let a = doc("a", "alpha gamma", "", Some("o"), Source::Bt);
        let pairs = [Pair { group: "bt", original: &o, augmented: &a }];
        let r = similarity_report(&pairs, &[&BuiltinEmbedder, &Broken], &RuleTagger).unwrap();
        let dir = tempfile::tempdir().unwrap();
        r.write_csv(&dir.path().join("s.csv")).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "pair_id,parent_id,method,field,rouge1_f,rouge2_f,rougeL_f,cosine:builtin-trigram,cosine:broken,pos_overlap"
        );
        assert!(lines.next().unwrap().starts_with("a,o,bt,text,0.500000,0.000000,0.500000,"));
        r.write_summary_json(&dir.path().join("s.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
        assert_eq!(v["methods"][0]["count"], 1);
    }
}
