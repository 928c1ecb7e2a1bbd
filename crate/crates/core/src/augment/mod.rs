//! Augmentation back ends. Each implements [`Augmenter`], which is all
//! [`crate::balance::apply_plan`] needs.

pub mod bt;
pub mod eda;
pub mod llm;

use crate::corpus::{LabeledDocument, Source};

/// Output of one augmentation call for one parent record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generated {
    pub text: String,
    pub explanation: String,
}

#[derive(Debug, thiserror::Error)]
pub enum AugmentError {
    #[error(transparent)]
    BackTranslation(#[from] bt::BtError),
    #[error(transparent)]
    Llm(#[from] llm::LlmError),
    #[error("{0}")]
    Other(String),
}

/// Produces one new record from a parent. Implementations must be
/// deterministic in `(parent, seed)` for a given provider state.
pub trait Augmenter: Sync {
    fn method(&self) -> Source;

    fn augment(&self, parent: &LabeledDocument, seed: u64) -> Result<Generated, AugmentError>;
}
