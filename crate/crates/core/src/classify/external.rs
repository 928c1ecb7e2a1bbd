use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;

use super::metrics::{confusion, ConfusionMatrix};
use super::ClassifyError;
use crate::corpus::LabeledCorpus;
use crate::label::Label;

#[derive(Deserialize)]
struct PredictionLine {
    id: String,
    label: String,
}

/// Read `{"id", "label"}` JSONL predictions from an external model and
/// score them against `gold`. Predictions for ids not in `gold` are ignored.
pub fn import_external_predictions(path: impl AsRef<Path>, gold: &LabeledCorpus) -> Result<ConfusionMatrix, ClassifyError> {
    let path = path.as_ref();
    let io = |source| ClassifyError::Io { path: path.display().to_string(), source };
    let file = File::open(path).map_err(io)?;
    let mut predicted: HashMap<String, Label> = HashMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| ClassifyError::BadPrediction { line: i + 1, message };
        let rec: PredictionLine = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        let label = rec.label.parse::<Label>().map_err(|e| bad(e.to_string()))?;
        if predicted.insert(rec.id.clone(), label).is_some() {
            return Err(ClassifyError::DuplicatePrediction(rec.id));
        }
    }
    let mut gold_labels = Vec::with_capacity(gold.len());
    let mut pred_labels = Vec::with_capacity(gold.len());
    for d in gold {
        let p = predicted.get(&d.id).ok_or_else(|| ClassifyError::MissingPrediction(d.id.clone()))?;
        gold_labels.push(d.label);
        pred_labels.push(*p);
    }
    confusion(&gold_labels, &pred_labels)
}
