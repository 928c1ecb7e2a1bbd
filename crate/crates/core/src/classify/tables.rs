//! Comparison tables: one summary row per training set, and class-wise
//! correct-count deltas between a baseline and an augmented run.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::bayes::train;
use super::metrics::{confusion, metrics, EvalReport};
use super::ClassifyError;
use crate::corpus::{validation_split, LabeledCorpus, ValidationMode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationSpec {
    pub fraction: f64,
    pub mode: ValidationMode,
    pub seed: u64,
}

/// Result of training on one corpus and testing on a shared test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRun {
    pub name: String,
    pub train_size: usize,
    /// Records the model was fitted on (train minus validation).
    pub fit_size: usize,
    pub validation_mode: Option<ValidationMode>,
    pub validation_size: usize,
    pub validation_accuracy: Option<f64>,
    pub test_size: usize,
    pub report: EvalReport,
}

fn accuracy_on(model: &super::BowModel, corpus: &LabeledCorpus) -> Result<EvalReport, ClassifyError> {
    let texts: Vec<&str> = corpus.iter().map(|d| d.text.as_str()).collect();
    let pred: Vec<_> = model.predict_batch(&texts).into_iter().map(|p| p.label).collect();
    let gold: Vec<_> = corpus.iter().map(|d| d.label).collect();
    metrics(&confusion(&gold, &pred)?)
}

/// Fit the builtin classifier on `train` (less an optional validation
/// carve-out) and score it on `test`.
pub fn evaluate(
    name: &str,
    train_set: &LabeledCorpus,
    test: &LabeledCorpus,
    smoothing: f64,
    validation: Option<ValidationSpec>,
) -> Result<EvalRun, ClassifyError> {
    let present = train_set.present_labels();
    if let Some(l) = test.present_labels().into_iter().find(|l| !present.contains(l)) {
        return Err(ClassifyError::LabelMismatch(l));
    }
    let (fit, val) = match validation {
        Some(v) if v.fraction > 0.0 => {
            let (f, val) = validation_split(train_set, v.fraction, v.mode, v.seed)?;
            (f, Some((v.mode, val)))
        }
        _ => (train_set.clone(), None),
    };
    let model = train(&fit, smoothing)?;
    let (validation_mode, validation_size, validation_accuracy) = match &val {
        Some((mode, v)) if !v.is_empty() => (Some(*mode), v.len(), Some(accuracy_on(&model, v)?.accuracy)),
        Some((mode, _)) => (Some(*mode), 0, None),
        None => (None, 0, None),
    };
    Ok(EvalRun {
        name: name.to_string(),
        train_size: train_set.len(),
        fit_size: fit.len(),
        validation_mode,
        validation_size,
        validation_accuracy,
        test_size: test.len(),
        report: accuracy_on(&model, test)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Average {
    #[default]
    Macro,
    Weighted,
}

impl Average {
    pub fn as_str(self) -> &'static str {
        match self {
            Average::Macro => "macro",
            Average::Weighted => "weighted",
        }
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into())
}

/// Columns: Type, Val-A, T-P, T-R, T-F, T-A, T-MCC.
pub fn render_summary_table(runs: &[EvalRun], average: Average) -> String {
    let mut out = String::new();
    let width = runs.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
    let _ = writeln!(
        out,
        "{:<width$} | {:>5} | {:>5} {:>5} {:>5} | {:>5} {:>6}",
        "Type", "Val-A", "T-P", "T-R", "T-F", "T-A", "T-MCC"
    );
    let _ = writeln!(out, "{}", "-".repeat(width + 43));
    for r in runs {
        let e = &r.report;
        let (p, rc, f) = match average {
            Average::Macro => (e.macro_precision, e.macro_recall, e.macro_f1),
            Average::Weighted => (e.weighted_precision, e.weighted_recall, e.weighted_f1),
        };
        let _ = writeln!(
            out,
            "{:<width$} | {:>5} | {:>5.3} {:>5.3} {:>5.3} | {:>5.3} {:>6.3}",
            r.name,
            fmt_opt(r.validation_accuracy),
            p,
            rc,
            f,
            e.accuracy,
            e.mcc
        );
    }
    let mode = runs.iter().find_map(|r| r.validation_mode).map_or("none".to_string(), |m| m.to_string());
    let _ = writeln!(out, "(T-P/T-R/T-F: {} average; Val-A: {mode} validation split)", average.as_str());
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDelta {
    pub class: String,
    pub base_ns: u64,
    pub other_ns: u64,
    /// Gold test records of the class.
    pub support: u64,
    /// `100 * (other_ns - base_ns) / support`.
    pub ins: f64,
}

pub fn improvement_pct(base_ns: u64, other_ns: u64, support: u64) -> f64 {
    if support == 0 {
        return 0.0;
    }
    100.0 * (other_ns as f64 - base_ns as f64) / support as f64
}

pub fn class_deltas(base: &EvalReport, other: &EvalReport) -> Vec<ClassDelta> {
    base.per_class
        .iter()
        .zip(&other.per_class)
        .map(|(b, o)| ClassDelta {
            class: b.class.clone(),
            base_ns: b.ns,
            other_ns: o.ns,
            support: b.support,
            ins: improvement_pct(b.ns, o.ns, b.support),
        })
        .collect()
}

/// Columns: Class, Type, T-P, T-R, T-F, NS, INS; two rows per class.
pub fn render_class_table(base: &EvalRun, other: &EvalRun) -> String {
    let mut out = String::new();
    let w = base.name.len().max(other.name.len()).max(4);
    let _ = writeln!(
        out,
        "{:<5} | {:<w$} | {:>5} {:>5} {:>5} | {:>4} | {:>6}",
        "Class", "Type", "T-P", "T-R", "T-F", "NS", "INS"
    );
    let _ = writeln!(out, "{}", "-".repeat(w + 44));
    for (d, (b, o)) in class_deltas(&base.report, &other.report)
        .iter()
        .zip(base.report.per_class.iter().zip(&other.report.per_class))
    {
        let _ = writeln!(
            out,
            "{:<5} | {:<w$} | {:>5.2} {:>5.2} {:>5.2} | {:>4} | {:>6.2}",
            d.class, base.name, b.precision, b.recall, b.f1, b.ns, d.ins
        );
        let _ = writeln!(
            out,
            "{:<5} | {:<w$} | {:>5.2} {:>5.2} {:>5.2} | {:>4} | {:>6}",
            "", other.name, o.precision, o.recall, o.f1, o.ns, ""
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::metrics::ConfusionMatrix;
    use crate::corpus::LabeledDocument;
    use crate::Label;

    fn report(rows: &[[u64; 4]; 4]) -> EvalReport {
        metrics(&ConfusionMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()).unwrap()
    }

    fn run(name: &str, rep: EvalReport) -> EvalRun {
        EvalRun {
            name: name.into(),
            train_size: 10,
            fit_size: 8,
            validation_mode: Some(ValidationMode::Stratified),
            validation_size: 2,
            validation_accuracy: Some(0.5),
            test_size: rep.total as usize,
            report: rep,
        }
    }

    #[test]
    fn ins_per_class_support() {
        // NS moves 32->34, 14->22, 34->35, 33->34 with 45 per class
        let base = report(&[[32, 13, 0, 0], [31, 14, 0, 0], [0, 0, 34, 11], [0, 0, 12, 33]]);
        let other = report(&[[34, 11, 0, 0], [23, 22, 0, 0], [0, 0, 35, 10], [0, 0, 11, 34]]);
        let d = class_deltas(&base, &other);
        let ins: Vec<f64> = d.iter().map(|c| (c.ins * 100.0).round() / 100.0).collect();
        assert_eq!(ins, [4.44, 17.78, 2.22, 2.22]);
        assert_eq!(d[1].support, 45);
        let table = render_class_table(&run("OD", base), &run("AD", other));
        // IVA base row: P = 14/27, R = 14/45, F = 28/72
        assert!(table.contains("IVA   | OD   |  0.52  0.31  0.39 |   14 |  17.78\n"), "{table}");
        assert!(table.contains("      | AD   |  0.67  0.49  0.56 |   22 |       \n"), "{table}");
        let lines: Vec<&str> = table.lines().collect();
        assert!(lines.iter().all(|l| l.len() == lines[0].len()), "{table}");
    }

    #[test]
    fn summary_table_columns() {
        let rep = report(&[[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]);
        let t = render_summary_table(&[run("Original", rep.clone()), run("M1", rep)], Average::Macro);
        let header: Vec<&str> = t.lines().next().unwrap().split_whitespace().filter(|s| *s != "|").collect();
        assert_eq!(header, ["Type", "Val-A", "T-P", "T-R", "T-F", "T-A", "T-MCC"]);
        assert!(t.contains("Original | 0.500 | 1.000 1.000 1.000 | 1.000  1.000"), "{t}");
        assert!(t.contains("macro average"));
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0].len(), lines[1].len());
        assert_eq!(lines[0].len(), lines[2].len());
    }

    #[test]
    fn evaluate_memorizable_corpus() {
        let docs: Vec<LabeledDocument> = Label::ALL
            .iter()
            .map(|l| LabeledDocument::original(l.code(), format!("token{}", l.code()), "", *l))
            .collect();
        let c = LabeledCorpus::new(docs).unwrap();
        let r = evaluate("toy", &c, &c, 1.0, None).unwrap();
        assert_eq!(r.report.accuracy, 1.0);
        assert_eq!(r.report.mcc, 1.0);
        assert_eq!(r.validation_accuracy, None);
    }

    #[test]
    fn evaluate_label_mismatch() {
        let train = LabeledCorpus::new(vec![LabeledDocument::original("a", "x", "", Label::PA)]).unwrap();
        let test = LabeledCorpus::new(vec![LabeledDocument::original("b", "y", "", Label::SA)]).unwrap();
        assert!(matches!(evaluate("x", &train, &test, 1.0, None), Err(ClassifyError::LabelMismatch(Label::SA))));
    }
}
