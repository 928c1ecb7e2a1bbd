//! Toolkit for balancing four-class wellness-dimension text corpora with
//! generated records.
//!
//! A run loads a [`corpus::LabeledCorpus`] and carves a stratified test
//! split. A [`balance::BalancePlan`] says how many records each class
//! needs, and an [`augment::Augmenter`] generates them. [`similarity`]
//! measures how far generated text drifts from its parent; [`classify`]
//! checks whether the balanced set trains a better classifier.

pub mod augment;
pub mod balance;
pub mod classify;
pub mod corpus;
pub mod label;
pub mod limiter;
pub mod remote;
pub mod mock;
pub mod par;
pub mod rng;
pub mod similarity;
pub mod synth;
pub mod text;

pub use label::Label;
