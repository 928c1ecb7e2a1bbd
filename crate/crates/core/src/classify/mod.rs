//! Downstream evaluation with a multinomial naive Bayes baseline. Scores
//! come from confusion matrices and feed the comparison tables.

pub mod bayes;
pub mod external;
pub mod metrics;
pub mod tables;

pub use bayes::{train, BowModel, Prediction};
pub use external::import_external_predictions;
pub use metrics::{confusion, mcc, metrics, ConfusionMatrix, EvalReport};
pub use tables::{evaluate, EvalRun};

#[derive(Debug, thiserror::Error)]
pub enum ClassifyError {
    #[error("cannot train on an empty corpus")]
    EmptyCorpus,
    #[error("smoothing must be positive and finite, got {0}")]
    BadSmoothing(f64),
    #[error("gold and predicted lists differ in length ({gold} vs {pred})")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("confusion matrix must be square and non-empty")]
    NotSquare,
    #[error("no prediction for id {0:?}")]
    MissingPrediction(String),
    #[error("predictions line {line}: {message}")]
    BadPrediction { line: usize, message: String },
    #[error("duplicate prediction for id {0:?}")]
    DuplicatePrediction(String),
    #[error("test set contains label {0} that no training record has")]
    LabelMismatch(crate::Label),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
}
