//! How far generated text drifts from its parent: ROUGE-1/2/L, embedding
//! cosine and POS-tag set overlap.

pub mod embed;
pub mod pos;
pub mod report;
pub mod rouge;

pub use crate::text::tokenize;
pub use embed::{cosine, BuiltinEmbedder, EmbeddingProvider, RemoteEmbedder};
pub use pos::{jaccard, pos_overlap, PosTagger, RuleTagger, Upos};
pub use report::{similarity_report, SimilarityReport};
pub use rouge::{rouge_l, rouge_n, RougeScore};
