//! Required augmentation counts and their application to a training split.
//!
//! Given per-class counts `alpha`, the test carve-out per class is
//! `R = min(alpha) - max(max(alpha) - alpha[j])`. Every class loses `R`
//! records to the test set, and the remainder is topped up to the largest
//! remaining class by augmentation.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::augment::{AugmentError, Augmenter};
use crate::corpus::{CorpusError, LabeledCorpus, LabeledDocument};
use crate::label::Label;
use crate::{par, rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancePlan {
    /// Original per-class counts.
    pub alpha: Vec<usize>,
    /// Deficit of each class relative to the majority class.
    pub beta: Vec<usize>,
    /// Records per class held out for testing (`R`).
    pub test_per_class: usize,
    /// `100 * R / alpha[j]`, report-only.
    pub red_pct: Vec<f64>,
    /// Training records per class after the test carve-out.
    pub reduced: Vec<usize>,
    /// Records to generate per class.
    pub to_augment: Vec<usize>,
    pub target_per_class: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("need at least two classes, got {0}")]
    TooFewClasses(usize),
    #[error("class {0} has no records")]
    EmptyClass(usize),
    #[error("imbalance too severe for this split rule (min {min}, max {max}: 2*min must exceed max)")]
    TooSevere { min: usize, max: usize },
    #[error("training set would be empty for class {class} ({count} records, {test_per_class} held out)")]
    EmptyTraining { class: usize, count: usize, test_per_class: usize },
    #[error("test size must be positive")]
    ZeroTestSize,
}

fn deficits(alpha: &[usize]) -> Result<Vec<usize>, PlanError> {
    if alpha.len() < 2 {
        return Err(PlanError::TooFewClasses(alpha.len()));
    }
    if let Some(j) = alpha.iter().position(|&a| a == 0) {
        return Err(PlanError::EmptyClass(j));
    }
    let max = *alpha.iter().max().expect("non-empty");
    Ok(alpha.iter().map(|&a| max - a).collect())
}

/// Compute the plan with the test size derived from the counts themselves.
pub fn compute_plan(alpha: &[usize]) -> Result<BalancePlan, PlanError> {
    let beta = deficits(alpha)?;
    let min = *alpha.iter().min().expect("non-empty");
    let max_beta = *beta.iter().max().expect("non-empty");
    if min <= max_beta {
        return Err(PlanError::TooSevere { min, max: *alpha.iter().max().unwrap() });
    }
    BalancePlan::with_test_size(alpha, min - max_beta)
}

impl BalancePlan {
    /// Plan with an explicitly chosen per-class test size, for corpora whose
    /// imbalance is too severe for [`compute_plan`].
    pub fn with_test_size(alpha: &[usize], test_per_class: usize) -> Result<BalancePlan, PlanError> {
        let beta = deficits(alpha)?;
        if test_per_class == 0 {
            return Err(PlanError::ZeroTestSize);
        }
        let mut reduced = Vec::with_capacity(alpha.len());
        for (class, &count) in alpha.iter().enumerate() {
            if count <= test_per_class {
                return Err(PlanError::EmptyTraining { class, count, test_per_class });
            }
            reduced.push(count - test_per_class);
        }
        let red_pct = alpha.iter().map(|&a| 100.0 * test_per_class as f64 / a as f64).collect();
        let target_per_class = *reduced.iter().max().expect("non-empty");
        let to_augment = reduced.iter().map(|&r| target_per_class - r).collect();
        Ok(BalancePlan {
            alpha: alpha.to_vec(),
            beta,
            test_per_class,
            red_pct,
            reduced,
            to_augment,
            target_per_class,
        })
    }

    /// Identity plan for a corpus that is already split: no test carve-out.
    pub fn for_training_counts(reduced: &[usize]) -> Result<BalancePlan, PlanError> {
        let alpha: Vec<usize> = reduced.to_vec();
        let beta = deficits(&alpha)?;
        let target_per_class = *alpha.iter().max().expect("non-empty");
        Ok(BalancePlan {
            to_augment: alpha.iter().map(|&r| target_per_class - r).collect(),
            red_pct: vec![0.0; alpha.len()],
            reduced: alpha.clone(),
            alpha,
            beta,
            test_per_class: 0,
            target_per_class,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.alpha.len()
    }

    pub fn train_total(&self) -> usize {
        self.target_per_class * self.num_classes()
    }

    pub fn test_total(&self) -> usize {
        self.test_per_class * self.num_classes()
    }

    pub fn generated_total(&self) -> usize {
        self.to_augment.iter().sum()
    }

    /// Reduction percentages rounded half away from zero to one decimal.
    pub fn red_pct_rounded(&self) -> Vec<f64> {
        self.red_pct.iter().map(|r| (r * 10.0).round() / 10.0).collect()
    }

    /// Text table with columns WD, alpha, Red, RC, AS, Tot.
    pub fn render_table(&self, labels: &[&str]) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<5} {:>7} {:>6} {:>7} {:>7} {:>7}", "WD", "alpha", "Red", "RC", "AS", "Tot.");
        for j in 0..self.num_classes() {
            let name = labels.get(j).copied().unwrap_or("?");
            let _ = writeln!(
                out,
                "{:<5} {:>7} {:>6.1} {:>7} {:>7} {:>7}",
                name,
                self.alpha[j],
                self.red_pct_rounded()[j],
                self.reduced[j],
                self.to_augment[j],
                self.reduced[j] + self.to_augment[j]
            );
        }
        let _ = writeln!(
            out,
            "R (test per class) = {}, test total = {}, balanced train total = {}",
            self.test_per_class,
            self.test_total(),
            self.train_total()
        );
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ApplyError {
    #[error("plan has {0} classes, corpus labels have 4")]
    PlanShape(usize),
    #[error("class {label}: training split has {actual} records, plan expects {expected}")]
    ClassMismatch { label: Label, expected: usize, actual: usize },
    #[error("augmentation failed for parent {parent_id:?} (class {label}): {source}")]
    Augment {
        parent_id: String,
        label: Label,
        #[source]
        source: AugmentError,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

struct Job<'a> {
    parent: &'a LabeledDocument,
    round: usize,
}

/// Pick parents for `need` generated records of one class: a seeded
/// shuffle of the class per round, so no parent repeats until every
/// parent has been used once.
fn schedule<'a>(parents: &[&'a LabeledDocument], need: usize, label: Label, seed: u64) -> Vec<Job<'a>> {
    use rand::seq::SliceRandom;
    let mut jobs = Vec::with_capacity(need);
    let mut round = 0;
    while jobs.len() < need {
        let mut order: Vec<&LabeledDocument> = parents.to_vec();
        order.shuffle(&mut rng::seeded(rng::derive_seed(seed, label.code(), round as u64)));
        for parent in order.into_iter().take(need - jobs.len()) {
            jobs.push(Job { parent, round });
        }
        round += 1;
    }
    jobs
}

/// Fill every class of `train` up to `plan.target_per_class`.
///
/// Output keeps all originals in their input order, followed by the
/// generated records grouped by class (fixed label order) and in parent
/// schedule order. Generation may run in parallel; output order does not
/// depend on it.
pub fn apply_plan(
    train: &LabeledCorpus,
    plan: &BalancePlan,
    augmenter: &dyn Augmenter,
    seed: u64,
) -> Result<LabeledCorpus, ApplyError> {
    if plan.num_classes() != Label::COUNT {
        return Err(ApplyError::PlanShape(plan.num_classes()));
    }
    for label in Label::ALL {
        let actual = train.count(label);
        let expected = plan.reduced[label.index()];
        if actual != expected {
            return Err(ApplyError::ClassMismatch { label, expected, actual });
        }
    }

    let mut jobs = Vec::with_capacity(plan.generated_total());
    for label in Label::ALL {
        let need = plan.to_augment[label.index()];
        if need == 0 {
            continue;
        }
        let parents: Vec<&LabeledDocument> = train.of_class(label).collect();
        jobs.extend(schedule(&parents, need, label, seed));
    }

    let method = augmenter.method();
    let generated = par::try_map(&jobs, |job| {
        let job_seed = rng::derive_seed(seed, &job.parent.id, job.round as u64);
        augmenter
            .augment(job.parent, job_seed)
            .map(|g| LabeledDocument {
                id: format!("{}.{}{}", job.parent.id, method, job.round),
                text: g.text,
                explanation: g.explanation,
                label: job.parent.label,
                source: method,
                parent_id: Some(job.parent.id.clone()),
            })
            .map_err(|source| ApplyError::Augment {
                parent_id: job.parent.id.clone(),
                label: job.parent.label,
                source,
            })
    })?;

    let mut docs = train.documents().to_vec();
    docs.extend(generated);
    Ok(LabeledCorpus::new(docs)?)
}
