use serde::{Deserialize, Serialize};

use super::ClassifyError;
use crate::label::Label;

/// Square count matrix, rows = gold class, columns = predicted class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    k: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(k: usize) -> Self {
        ConfusionMatrix { k, counts: vec![0; k * k] }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self, ClassifyError> {
        let k = rows.len();
        if k == 0 || rows.iter().any(|r| r.len() != k) {
            return Err(ClassifyError::NotSquare);
        }
        Ok(ConfusionMatrix { k, counts: rows.concat() })
    }

    pub fn classes(&self) -> usize {
        self.k
    }

    pub fn get(&self, gold: usize, pred: usize) -> u64 {
        self.counts[gold * self.k + pred]
    }

    pub fn add(&mut self, gold: usize, pred: usize) {
        self.counts[gold * self.k + pred] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k).map(|i| self.get(i, i)).sum()
    }

    pub fn row_sum(&self, gold: usize) -> u64 {
        (0..self.k).map(|j| self.get(gold, j)).sum()
    }

    pub fn col_sum(&self, pred: usize) -> u64 {
        (0..self.k).map(|i| self.get(i, pred)).sum()
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.k).map(<[u64]>::to_vec).collect()
    }

    /// Relabel classes: new class `i` is old class `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> ConfusionMatrix {
        let mut out = ConfusionMatrix::zeros(self.k);
        for i in 0..self.k {
            for j in 0..self.k {
                out.counts[i * self.k + j] = self.get(perm[i], perm[j]);
            }
        }
        out
    }
}

/// Count gold/predicted pairs over the four labels.
pub fn confusion(gold: &[Label], pred: &[Label]) -> Result<ConfusionMatrix, ClassifyError> {
    if gold.len() != pred.len() {
        return Err(ClassifyError::LengthMismatch { gold: gold.len(), pred: pred.len() });
    }
    let mut cm = ConfusionMatrix::zeros(Label::COUNT);
    for (g, p) in gold.iter().zip(pred) {
        cm.add(g.index(), p.index());
    }
    Ok(cm)
}

/// Multiclass Matthews correlation (Gorodkin's R_K), in covariance form:
/// `(c*s - Σ p_k t_k) / sqrt((s² - Σ p_k²)(s² - Σ t_k²))` with `c` the
/// trace, `s` the total, `t` row sums and `p` column sums. Returns 0 when
/// the denominator vanishes. Reduces to the binary formula for K = 2.
pub fn mcc(cm: &ConfusionMatrix) -> Result<f64, ClassifyError> {
    let s = i128::from(cm.total());
    if s == 0 {
        return Err(ClassifyError::EmptyMatrix);
    }
    let c = i128::from(cm.trace());
    let (mut pt, mut pp, mut tt) = (0i128, 0i128, 0i128);
    for k in 0..cm.classes() {
        let t = i128::from(cm.row_sum(k));
        let p = i128::from(cm.col_sum(k));
        pt += p * t;
        pp += p * p;
        tt += t * t;
    }
    let num = c * s - pt;
    let den_pred = s * s - pp;
    let den_true = s * s - tt;
    if den_pred == 0 || den_true == 0 {
        log::debug!("mcc denominator is zero; reporting 0");
        return Ok(0.0);
    }
    let value = num as f64 / (den_pred as f64 * den_true as f64).sqrt();
    Ok(value.clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Correctly classified records of this class.
    pub ns: u64,
    /// Gold records of this class.
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_class: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    pub mcc: f64,
    pub total: u64,
    pub confusion: Vec<Vec<u64>>,
}

impl EvalReport {
    pub fn class(&self, name: &str) -> Option<&ClassMetrics> {
        self.per_class.iter().find(|c| c.class == name)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn class_name(k: usize, i: usize) -> String {
    if k == Label::COUNT {
        Label::ALL[i].code().to_string()
    } else {
        format!("class{i}")
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<EvalReport, ClassifyError> {
    let total = cm.total();
    if total == 0 {
        return Err(ClassifyError::EmptyMatrix);
    }
    let k = cm.classes();
    let per_class: Vec<ClassMetrics> = (0..k)
        .map(|i| {
            let ns = cm.get(i, i);
            let precision = ratio(ns, cm.col_sum(i));
            let recall = ratio(ns, cm.row_sum(i));
            ClassMetrics {
                class: class_name(k, i),
                precision,
                recall,
                f1: harmonic(precision, recall),
                ns,
                support: cm.row_sum(i),
            }
        })
        .collect();
    let macro_of = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / k as f64;
    let weighted_of = |f: fn(&ClassMetrics) -> f64| {
        per_class.iter().map(|c| f(c) * c.support as f64).sum::<f64>() / total as f64
    };
    Ok(EvalReport {
        accuracy: ratio(cm.trace(), total),
        macro_precision: macro_of(|c| c.precision),
        macro_recall: macro_of(|c| c.recall),
        macro_f1: macro_of(|c| c.f1),
        weighted_precision: weighted_of(|c| c.precision),
        weighted_recall: weighted_of(|c| c.recall),
        weighted_f1: weighted_of(|c| c.f1),
        mcc: mcc(cm)?,
        total,
        confusion: cm.rows(),
        per_class,
    })
}
