//! Classifier quality metrics and model selection.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{split_indices, train_matrix, ClassifierKind, Hyperparameters, LabeledExample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn from_labels(truth: &[u8], predicted: &[u8]) -> Self {
        let mut c = ConfusionCounts::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t, p) {
                (1, 1) => c.tp += 1,
                (0, 1) => c.fp += 1,
                (0, 0) => c.tn += 1,
                _ => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Harmonic mean of precision and recall on the positive label; 0 when
/// both are 0.
pub fn f1_score(c: &ConfusionCounts) -> f64 {
    let p = c.precision();
    let r = c.recall();
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Matthews correlation coefficient; 0 when any marginal is empty.
pub fn mcc(c: &ConfusionCounts) -> f64 {
    let (tp, fp, tn, fn_) = (c.tp as f64, c.fp as f64, c.tn as f64, c.fn_ as f64);
    let den = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    if den == 0.0 {
        return 0.0;
    }
    (tp * tn - fp * fn_) / den.sqrt()
}

/// Area under the ROC curve via the Mann-Whitney rank statistic, with tied
/// scores sharing their mean rank.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidArgument("scores and labels differ in length".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InvalidArgument("ROC AUC needs both labels".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut positive_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Ranks are 1-based; the tied block i..=j shares their mean.
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        let tied_pos = order[i..=j].iter().filter(|&&k| labels[k] == 1).count();
        positive_rank_sum += mean_rank * tied_pos as f64;
        i = j + 1;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    Ok((positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Mean misclassification percentage over `folds` seeded folds.
pub fn cv_error(
    kind: ClassifierKind,
    examples: &[LabeledExample],
    hyperparameters: Hyperparameters,
    folds: usize,
    seed: u64,
) -> Result<f64> {
    let n = examples.len();
    if folds < 2 || folds > n {
        return Err(Error::InvalidArgument(format!(
            "cannot split {n} examples into {folds} folds"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut total = 0.0;
    let mut start = 0;
    for fold in 0..folds {
        let len = n / folds + usize::from(fold < n % folds);
        let held = &order[start..start + len];
        let (x, y): (Vec<Vec<f64>>, Vec<u8>) = order[..start]
            .iter()
            .chain(&order[start + len..])
            .map(|&i| (examples[i].features.0.clone(), examples[i].label))
            .unzip();
        let model = train_matrix(kind, &x, &y, hyperparameters, seed)?;
        let mut wrong = 0;
        for &i in held {
            if model.predict(&examples[i].features.0)?.label != examples[i].label {
                wrong += 1;
            }
        }
        total += 100.0 * wrong as f64 / len as f64;
        start += len;
    }
    Ok(total / folds as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub kind: ClassifierKind,
    pub f1: f64,
    /// Percent; absent when cross-validation was skipped.
    pub cv_error: Option<f64>,
    pub roc_auc: f64,
    pub mcc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionOptions {
    pub train_fraction: f64,
    pub cv_folds: Option<usize>,
}

impl Default for SelectionOptions {
    fn default() -> Self {
        SelectionOptions {
            train_fraction: 0.8,
            cv_folds: Some(10),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSelection {
    pub best: ClassifierKind,
    pub rows: Vec<MetricRow>,
}

/// Held-out metrics for one trained classifier.
pub fn evaluate_kind(
    kind: ClassifierKind,
    train: &[LabeledExample],
    test: &[LabeledExample],
    hyperparameters: Hyperparameters,
    seed: u64,
) -> Result<MetricRow> {
    let (x, y): (Vec<Vec<f64>>, Vec<u8>) = train
        .iter()
        .map(|e| (e.features.0.clone(), e.label))
        .unzip();
    let model = train_matrix(kind, &x, &y, hyperparameters, seed)?;
    let rows: Vec<Vec<f64>> = test.iter().map(|e| e.features.0.clone()).collect();
    let truth: Vec<u8> = test.iter().map(|e| e.label).collect();
    let predictions = model.predict_many(&rows)?;
    let labels: Vec<u8> = predictions.iter().map(|p| p.label).collect();
    let scores: Vec<f64> = predictions.iter().map(|p| p.score).collect();
    let counts = ConfusionCounts::from_labels(&truth, &labels);
    Ok(MetricRow {
        kind,
        f1: f1_score(&counts),
        cv_error: None,
        roc_auc: roc_auc(&scores, &truth)?,
        mcc: mcc(&counts),
    })
}

/// Trains every kind on a seeded split of `examples` and picks the best F1,
/// breaking ties by MCC and then by input order.
pub fn select_model(
    examples: &[LabeledExample],
    kinds: &[ClassifierKind],
    hyperparameters: Hyperparameters,
    seed: u64,
    options: SelectionOptions,
) -> Result<ModelSelection> {
    if kinds.is_empty() {
        return Err(Error::InvalidArgument("no classifier kinds to compare".into()));
    }
    let (train_idx, test_idx) = split_indices(examples.len(), options.train_fraction, seed)?;
    let train: Vec<LabeledExample> = train_idx.iter().map(|&i| examples[i].clone()).collect();
    let test: Vec<LabeledExample> = test_idx.iter().map(|&i| examples[i].clone()).collect();
    let mut rows = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let mut row = evaluate_kind(kind, &train, &test, hyperparameters, seed)?;
        if let Some(folds) = options.cv_folds {
            row.cv_error = Some(cv_error(kind, examples, hyperparameters, folds, seed)?);
        }
        rows.push(row);
    }
    let mut best = 0;
    for (i, row) in rows.iter().enumerate().skip(1) {
        let b = &rows[best];
        if row.f1 > b.f1 || (row.f1 == b.f1 && row.mcc > b.mcc) {
            best = i;
        }
    }
    Ok(ModelSelection {
        best: rows[best].kind,
        rows,
    })
}
