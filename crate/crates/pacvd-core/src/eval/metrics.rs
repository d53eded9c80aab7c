//! Confusion matrix and the standard binary-classification metrics, with
//! explicit zero-denominator conventions: precision and recall are 0 when
//! undefined, F1 is 0 when precision + recall is 0, and MCC is 0 when any
//! marginal is zero. Unparseable verdicts score as "no" and are tallied
//! separately.

use serde::{Deserialize, Serialize};

use super::dataset::Label;
use super::EvalError;
use crate::gateway::VerdictLabel;

use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
    pub unparseable: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.true_positives + self.false_positives + self.false_negatives + self.true_negatives
    }

    pub fn record(&mut self, label: Label, verdict: VerdictLabel) {
        // conservative: unparseable counts as a "no" prediction
        let predicted_vulnerable = verdict == VerdictLabel::Yes;
        if verdict == VerdictLabel::Unparseable {
            self.unparseable += 1;
        }
        match (label.is_vulnerable(), predicted_vulnerable) {
            (true, true) => self.true_positives += 1,
            (true, false) => self.false_negatives += 1,
            (false, true) => self.false_positives += 1,
            (false, false) => self.true_negatives += 1,
        }
    }

    pub fn metrics(&self) -> MetricsReport {
        let tp = self.true_positives as f64;
        let fp = self.false_positives as f64;
        let fn_ = self.false_negatives as f64;
        let tn = self.true_negatives as f64;
        let total = tp + fp + fn_ + tn;
        let accuracy = if total == 0.0 { 0.0 } else { (tp + tn) / total };
        let precision = if tp + fp == 0.0 { 0.0 } else { tp / (tp + fp) };
        let recall = if tp + fn_ == 0.0 { 0.0 } else { tp / (tp + fn_) };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        let marginals = [tp + fp, tp + fn_, tn + fp, tn + fn_];
        let mcc = if marginals.contains(&0.0) {
            0.0
        } else {
            (tp * tn - fp * fn_) / marginals.iter().product::<f64>().sqrt()
        };
        MetricsReport {
            accuracy,
            precision,
            recall,
            f1,
            mcc,
            per_cwe: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mcc: f64,
    #[serde(default)]
    pub per_cwe: BTreeMap<String, MetricsReport>,
}

/// One scored prediction.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub label: Label,
    pub verdict: VerdictLabel,
    pub cwe: Option<String>,
}

/// Fold predictions into a confusion matrix and the metrics report with a
/// per-CWE breakdown (samples without a CWE aggregate under "unlabeled").
pub fn score(predictions: &[Prediction]) -> Result<(ConfusionMatrix, MetricsReport), EvalError> {
    if predictions.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut overall = ConfusionMatrix::default();
    let mut by_cwe: BTreeMap<String, ConfusionMatrix> = BTreeMap::new();
    for p in predictions {
        overall.record(p.label, p.verdict);
        let key = p.cwe.clone().unwrap_or_else(|| "unlabeled".to_string());
        by_cwe.entry(key).or_default().record(p.label, p.verdict);
    }
    let mut report = overall.metrics();
    report.per_cwe = by_cwe
        .into_iter()
        .map(|(cwe, m)| (cwe, m.metrics()))
        .collect();
    Ok((overall, report))
}
