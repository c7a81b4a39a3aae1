use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Classification scores over one evaluated set.
///
/// Samples on which no neuron fired are counted in `no_spike` and are
/// misclassifications; they do not appear in `confusion`. Hence
/// `accuracy = trace(confusion) / (sum(confusion) + no_spike)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub f1_macro: f64,
    pub per_class_f1: Vec<f64>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<u64>>,
    pub ties: u64,
    pub no_spike: u64,
}

impl Metrics {
    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum::<u64>() + self.no_spike
    }

    pub fn correct(&self) -> u64 {
        (0..self.confusion.len()).map(|k| self.confusion[k][k]).sum()
    }
}

/// Accuracy, per-class F1, macro F1 and confusion matrix.
///
/// Macro F1 averages over classes that occur in the labels or the
/// predictions; a class with neither is reported with F1 = 0 and skipped.
pub fn compute_metrics(
    predictions: &[Option<usize>],
    labels: &[usize],
    classes: usize,
) -> Result<Metrics> {
    if predictions.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::invalid("cannot score an empty set"));
    }
    let mut confusion = vec![vec![0u64; classes]; classes];
    let mut no_spike = 0u64;
    for (p, &y) in predictions.iter().zip(labels) {
        if y >= classes {
            return Err(Error::invalid(format!("label {y} >= class count {classes}")));
        }
        match p {
            Some(p) if *p < classes => confusion[y][*p] += 1,
            Some(p) => {
                return Err(Error::invalid(format!(
                    "prediction {p} >= class count {classes}"
                )))
            }
            None => no_spike += 1,
        }
    }
    let mut support = vec![0u64; classes];
    for &y in labels {
        support[y] += 1;
    }
    let mut per_class_f1 = Vec::with_capacity(classes);
    let mut counted = Vec::new();
    for k in 0..classes {
        let tp = confusion[k][k];
        let predicted: u64 = (0..classes).map(|r| confusion[r][k]).sum();
        let fp = predicted - tp;
        let fn_ = support[k] - tp;
        let denom = 2 * tp + fp + fn_;
        let f1 = if denom == 0 {
            0.0
        } else {
            2.0 * tp as f64 / denom as f64
        };
        per_class_f1.push(f1);
        if support[k] > 0 || predicted > 0 {
            counted.push(f1);
        }
    }
    if counted.len() < 2 {
        log::warn!("macro F1 is degenerate: only {} class(es) present", counted.len());
    }
    let f1_macro = counted.iter().sum::<f64>() / counted.len().max(1) as f64;
    let correct: u64 = (0..classes).map(|k| confusion[k][k]).sum();
    Ok(Metrics {
        accuracy: correct as f64 / labels.len() as f64,
        f1_macro,
        per_class_f1,
        confusion,
        ties: 0,
        no_spike,
    })
}
