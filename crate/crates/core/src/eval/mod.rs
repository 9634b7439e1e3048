//! Undersampling split protocol, threshold metrics, ROC/AUC and
//! repeated-split cross validation over a pluggable fit function.

mod roc;
mod split;

pub use roc::{evaluate, roc_auc, MetricReport};
pub use split::{undersample_split, SamplingOptions, SamplingPlan};

use serde::{Deserialize, Serialize};

use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

/// Tally a prediction vector against truth.
pub fn confusion(y_true: &[bool], y_pred: &[bool]) -> ConfusionMatrix {
    assert_eq!(y_true.len(), y_pred.len());
    let mut cm = ConfusionMatrix {
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
    };
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (true, true) => cm.tp += 1,
            (false, true) => cm.fp += 1,
            (false, false) => cm.tn += 1,
            (true, false) => cm.fn_ += 1,
        }
    }
    cm
}

/// Threshold metrics from a confusion matrix. Undefined ratios (0/0)
/// become 0 and are listed in `zero_division`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMetrics {
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub balanced_accuracy: f64,
    pub f1: f64,
    pub zero_division: Vec<String>,
}

pub fn metrics(cm: &ConfusionMatrix) -> ThresholdMetrics {
    let mut flags = Vec::new();
    let mut ratio = |num: usize, den: usize, name: &str| -> f64 {
        if den == 0 {
            flags.push(name.to_string());
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(cm.tp, cm.tp + cm.fp, "precision");
    let recall = ratio(cm.tp, cm.tp + cm.fn_, "recall");
    let tnr = ratio(cm.tn, cm.tn + cm.fp, "tnr");
    let total = cm.tp + cm.fp + cm.tn + cm.fn_;
    let accuracy = ratio(cm.tp + cm.tn, total, "accuracy");
    let balanced_accuracy = (recall + tnr) / 2.0;
    let f1 = if precision + recall == 0.0 {
        flags.push("f1".to_string());
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    ThresholdMetrics {
        precision,
        recall,
        accuracy,
        balanced_accuracy,
        f1,
        zero_division: flags,
    }
}

/// Per-fold and aggregate cross-validation results.
#[derive(Debug, Clone, Serialize)]
pub struct CrossValReport {
    pub folds: Vec<MetricReport>,
    pub mean: ThresholdSummary,
    pub stdev: ThresholdSummary,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ThresholdSummary {
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub balanced_accuracy: f64,
    pub f1: f64,
    pub auc: f64,
}

fn summarize(folds: &[MetricReport]) -> (ThresholdSummary, ThresholdSummary) {
    let n = folds.len() as f64;
    let fields: [(&str, fn(&MetricReport) -> f64); 6] = [
        ("precision", |r| r.precision),
        ("recall", |r| r.recall),
        ("accuracy", |r| r.accuracy),
        ("balanced_accuracy", |r| r.balanced_accuracy),
        ("f1", |r| r.f1),
        ("auc", |r| r.auc),
    ];
    let mut mean = ThresholdSummary::default();
    let mut stdev = ThresholdSummary::default();
    for (name, get) in fields {
        let m = folds.iter().map(get).sum::<f64>() / n;
        let var = folds.iter().map(|r| (get(r) - m).powi(2)).sum::<f64>() / n;
        let s = var.sqrt();
        let slot = |t: &mut ThresholdSummary, v: f64| match name {
            "precision" => t.precision = v,
            "recall" => t.recall = v,
            "accuracy" => t.accuracy = v,
            "balanced_accuracy" => t.balanced_accuracy = v,
            "f1" => t.f1 = v,
            _ => t.auc = v,
        };
        slot(&mut mean, m);
        slot(&mut stdev, s);
    }
    (mean, stdev)
}

/// Repeated random undersampled splits with seeds `seed + fold`. The fit
/// function receives (fold, train indices, test indices) and returns test
/// scores; metrics are computed against `truth` when given (synthetic
/// ground-truth evaluation), otherwise against `labels`.
pub fn cross_validate<F>(
    labels: &[bool],
    truth: Option<&[bool]>,
    options: &SamplingOptions,
    folds: usize,
    seed: u64,
    threshold: f64,
    mut fit_score: F,
) -> Result<CrossValReport>
where
    F: FnMut(usize, &[usize], &[usize]) -> Result<Vec<f64>>,
{
    let mut reports = Vec::with_capacity(folds);
    for fold in 0..folds.max(1) {
        let plan = SamplingPlan::from_labels(labels, options, seed + fold as u64)?;
        let (train_idx, test_idx) = undersample_split(labels, &plan)?;
        let scores = fit_score(fold, &train_idx, &test_idx).map_err(|e| {
            crate::Error::Training(format!("fold {fold}: {e}"))
        })?;
        assert_eq!(scores.len(), test_idx.len(), "one score per test row");
        let eval_labels = truth.unwrap_or(labels);
        let y_true: Vec<bool> = test_idx.iter().map(|&i| eval_labels[i]).collect();
        reports.push(evaluate(&y_true, &scores, threshold)?);
    }
    let (mean, stdev) = summarize(&reports);
    Ok(CrossValReport {
        folds: reports,
        mean,
        stdev,
    })
}
