//! ROC construction and trapezoidal AUC with tie grouping.
//!
//! The AUC accumulates pair counts per distinct-score group, which makes
//! it bit-identical to the normalized Mann-Whitney U of the positive
//! scores against the negative scores.

use serde::Serialize;

use super::{confusion, metrics};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct MetricReport {
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub balanced_accuracy: f64,
    pub f1: f64,
    pub auc: f64,
    /// (fpr, tpr) vertices: one per distinct score, (0,0) first, (1,1) last.
    pub roc: Vec<(f64, f64)>,
    pub zero_division: Vec<String>,
}

/// ROC vertices and AUC from scores (higher = more positive).
pub fn roc_auc(y_true: &[bool], scores: &[f64]) -> Result<(Vec<(f64, f64)>, f64)> {
    assert_eq!(y_true.len(), scores.len());
    let p = y_true.iter().filter(|l| **l).count();
    let n = y_true.len() - p;
    if p == 0 || n == 0 {
        return Err(Error::InvalidArgument(
            "roc_auc needs both classes in y_true".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut roc = Vec::with_capacity(scores.len() + 1);
    roc.push((0.0, 0.0));
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut pair_wins = 0.0f64; // positives beating negatives, ties half
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let mut group_pos = 0usize;
        let mut group_neg = 0usize;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if y_true[order[j]] {
                group_pos += 1;
            } else {
                group_neg += 1;
            }
            j += 1;
        }
        // negatives strictly below this group: n - fp_so_far - group_neg
        pair_wins += group_pos as f64 * (n - fp - group_neg) as f64
            + 0.5 * (group_pos * group_neg) as f64;
        tp += group_pos;
        fp += group_neg;
        roc.push((fp as f64 / n as f64, tp as f64 / p as f64));
        i = j;
    }
    let auc = pair_wins / (p as f64 * n as f64);
    Ok((roc, auc))
}

/// Full report: threshold metrics at `threshold` plus ROC/AUC.
pub fn evaluate(y_true: &[bool], scores: &[f64], threshold: f64) -> Result<MetricReport> {
    let predictions: Vec<bool> = scores.iter().map(|&s| s >= threshold).collect();
    let cm = confusion(y_true, &predictions);
    let t = metrics(&cm);
    let (roc, auc) = roc_auc(y_true, scores)?;
    Ok(MetricReport {
        precision: t.precision,
        recall: t.recall,
        accuracy: t.accuracy,
        balanced_accuracy: t.balanced_accuracy,
        f1: t.f1,
        auc,
        roc,
        zero_division: t.zero_division,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_ranking_has_auc_one() {
        let y = vec![true, true, false, false];
        let s = vec![0.9, 0.8, 0.2, 0.1];
        let (_, auc) = roc_auc(&y, &s).unwrap();
        assert_eq!(auc, 1.0);
    }

    #[test]
    fn reversed_ranking_has_auc_zero() {
        let y = vec![true, true, false, false];
        let s = vec![0.1, 0.2, 0.8, 0.9];
        let (_, auc) = roc_auc(&y, &s).unwrap();
        assert_eq!(auc, 0.0);
    }

    #[test]
    fn constant_scores_give_half() {
        let y = vec![true, false, true, false];
        let s = vec![0.5; 4];
        let (roc, auc) = roc_auc(&y, &s).unwrap();
        assert_eq!(auc, 0.5);
        // single tie group: exactly one interior vertex
        assert_eq!(roc, vec![(0.0, 0.0), (1.0, 1.0)]);
    }

    #[test]
    fn roc_shape_invariants_hold() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(9);
        for _ in 0..200 {
            let n = rng.random_range(2..60);
            let mut y: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
            y[0] = true;
            if y.iter().all(|v| *v) {
                y[n - 1] = false;
            }
            let s: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64 / 5.0).collect();
            let (roc, auc) = roc_auc(&y, &s).unwrap();
            assert_eq!(roc.first(), Some(&(0.0, 0.0)));
            assert_eq!(roc.last(), Some(&(1.0, 1.0)));
            for pair in roc.windows(2) {
                assert!(pair[1].0 >= pair[0].0);
                assert!(pair[1].1 >= pair[0].1);
            }
            assert!((0.0..=1.0).contains(&auc));

            // trapezoid over the vertices equals the pair-count AUC
            let trapezoid: f64 = roc
                .windows(2)
                .map(|p| (p[1].0 - p[0].0) * (p[1].1 + p[0].1) / 2.0)
                .sum();
            assert!((trapezoid - auc).abs() < 1e-12);
        }
    }

    #[test]
    fn roc_is_invariant_under_monotone_transforms() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(31);
        let y: Vec<bool> = (0..50).map(|i| i % 3 == 0).collect();
        let s: Vec<f64> = (0..50).map(|_| rng.random_range(0..10) as f64).collect();
        let (roc_base, auc_base) = roc_auc(&y, &s).unwrap();
        for transform in [|v: f64| v * 3.0 + 1.0, |v: f64| (v + 1.0).ln(), |v: f64| v.exp()] {
            let t: Vec<f64> = s.iter().map(|&v| transform(v)).collect();
            let (roc_t, auc_t) = roc_auc(&y, &t).unwrap();
            assert_eq!(roc_base, roc_t);
            assert_eq!(auc_base, auc_t);
        }
    }

    #[test]
    fn random_scores_calibrate_to_half() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(2024);
        let mut sum = 0.0;
        let trials = 500;
        for _ in 0..trials {
            let y: Vec<bool> = (0..100).map(|i| i < 30).collect();
            let s: Vec<f64> = (0..100).map(|_| rng.random::<f64>()).collect();
            sum += roc_auc(&y, &s).unwrap().1;
        }
        let mean = sum / trials as f64;
        assert!((0.48..=0.52).contains(&mean), "mean auc {mean}");
    }

    #[test]
    fn single_class_is_an_error() {
        assert!(roc_auc(&[true, true], &[0.1, 0.2]).is_err());
    }
}
