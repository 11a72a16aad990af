use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::{Error, Result};

/// Default decision threshold; a probability equal to it counts as fraud.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Counts with fraud as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        Self { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn record(&mut self, predicted_fraud: bool, label: Label) {
        match (predicted_fraud, label.is_fraud()) {
            (true, true) => self.tp += 1,
            (false, false) => self.tn += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
        }
    }
}

/// Predicts fraud iff `p >= threshold` and tallies against `labels`.
pub fn confusion(probs: &[f64], labels: &[Label], threshold: f64) -> Result<ConfusionMatrix> {
    if probs.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} probabilities for {} labels",
            probs.len(),
            labels.len()
        )));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Parameter(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &y) in probs.iter().zip(labels) {
        cm.record(p >= threshold, y);
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub cm: ConfusionMatrix,
    pub threshold: f64,
    /// Set when any metric hit a 0/0 and was defined as 0.
    pub degenerate: bool,
}

/// Accuracy, precision, recall and F1. A metric whose denominator is zero
/// is reported as 0 and flags the report as degenerate.
pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    metrics_at(cm, DEFAULT_THRESHOLD)
}

pub fn metrics_at(cm: &ConfusionMatrix, threshold: f64) -> Result<MetricsReport> {
    if cm.total() == 0 {
        return Err(Error::Input("confusion matrix is empty".into()));
    }
    let mut degenerate = false;
    let mut ratio = |num: f64, den: f64| {
        if den == 0.0 {
            degenerate = true;
            0.0
        } else {
            num / den
        }
    };
    let (tp, tn, fp, fn_) = (cm.tp as f64, cm.tn as f64, cm.fp as f64, cm.fn_ as f64);
    let accuracy = ratio(tp + tn, tp + tn + fp + fn_);
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = ratio(2.0 * precision * recall, precision + recall);
    Ok(MetricsReport {
        accuracy,
        precision,
        recall,
        f1,
        cm: *cm,
        threshold,
        degenerate,
    })
}

/// F1 from precision and recall, 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Mean and sample standard deviation (n − 1) of one metric across folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len() as f64;
        if values.is_empty() {
            return Summary {
                mean: 0.0,
                std: 0.0,
            };
        }
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Summary { mean, std }
    }
}

/// Cross-fold mean ± std of every metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub accuracy: Summary,
    pub precision: Summary,
    pub recall: Summary,
    pub f1: Summary,
    pub folds: usize,
}

impl AggregateMetrics {
    pub fn of(reports: &[MetricsReport]) -> Self {
        let col =
            |f: fn(&MetricsReport) -> f64| Summary::of(&reports.iter().map(f).collect::<Vec<_>>());
        Self {
            accuracy: col(|r| r.accuracy),
            precision: col(|r| r.precision),
            recall: col(|r| r.recall),
            f1: col(|r| r.f1),
            folds: reports.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Fraud, Legit};

    #[test]
    fn simple_tally() {
        let cm = confusion(&[0.9, 0.1], &[Fraud, Legit], 0.5).unwrap();
        assert_eq!(cm, ConfusionMatrix::new(1, 1, 0, 0));
    }

    #[test]
    fn threshold_is_inclusive() {
        let cm = confusion(&[0.5, 0.5, 0.5], &[Fraud, Legit, Legit], 0.5).unwrap();
        assert_eq!(cm, ConfusionMatrix::new(1, 0, 2, 0));
    }

    #[test]
    fn seven_sample_hand_tally() {
        let probs = [0.9, 0.7, 0.3, 0.2, 0.1, 0.4, 0.6];
        let labels = [Fraud, Fraud, Fraud, Legit, Legit, Legit, Legit];
        let cm = confusion(&probs, &labels, 0.5).unwrap();
        assert_eq!(cm, ConfusionMatrix::new(2, 3, 1, 1));
        let m = metrics(&cm).unwrap();
        assert!((m.accuracy - 5.0 / 7.0).abs() < 1e-15);
        assert!((m.precision - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.recall - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert!(!m.degenerate);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            confusion(&[0.1], &[], 0.5),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn perfect_classifier() {
        let m = metrics(&ConfusionMatrix::new(4, 6, 0, 0)).unwrap();
        assert_eq!(
            (m.accuracy, m.precision, m.recall, m.f1),
            (1.0, 1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn zero_denominators_are_flagged() {
        let m = metrics(&ConfusionMatrix::new(0, 5, 0, 0)).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
        assert!(m.degenerate);
        assert!(matches!(
            metrics(&ConfusionMatrix::default()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn summary_statistics() {
        let s = Summary::of(&[1.0, 2.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert!((s.std - 1.0).abs() < 1e-15);
    }
}
