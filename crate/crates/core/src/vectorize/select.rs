//! Univariate feature scoring and top-k selection.

use super::FeatureMatrix;

/// Per-column chi-squared statistic on the 2x2 (presence x class) table,
/// with expected counts from the marginals. Presence means weight > 0.
/// Columns with a zero marginal score 0. A single-class label vector
/// yields all-zero scores.
pub fn chi2_scores(x: &FeatureMatrix, y: &[bool]) -> Vec<f64> {
    assert_eq!(x.n_rows, y.len());
    let n = y.len() as f64;
    let n_pos = y.iter().filter(|l| **l).count() as f64;
    let n_neg = n - n_pos;
    let mut present_pos = vec![0.0f64; x.n_cols];
    let mut present_neg = vec![0.0f64; x.n_cols];
    for (row, &label) in x.rows.iter().zip(y) {
        for &(col, w) in row {
            if w > 0.0 {
                if label {
                    present_pos[col as usize] += 1.0;
                } else {
                    present_neg[col as usize] += 1.0;
                }
            }
        }
    }
    if n_pos == 0.0 || n_neg == 0.0 {
        return vec![0.0; x.n_cols];
    }
    (0..x.n_cols)
        .map(|c| {
            let observed = [
                present_pos[c],
                present_neg[c],
                n_pos - present_pos[c],
                n_neg - present_neg[c],
            ];
            let present = present_pos[c] + present_neg[c];
            let absent = n - present;
            if present == 0.0 || absent == 0.0 {
                return 0.0;
            }
            let expected = [
                present * n_pos / n,
                present * n_neg / n,
                absent * n_pos / n,
                absent * n_neg / n,
            ];
            observed
                .iter()
                .zip(&expected)
                .map(|(o, e)| (o - e) * (o - e) / e)
                .sum()
        })
        .collect()
}

/// Per-column one-way ANOVA F statistic on raw values (implicit zeros
/// included). Zero within-group variance scores +inf when the groups
/// differ and 0 when they do not.
pub fn anova_f_scores(x: &FeatureMatrix, y: &[bool]) -> Vec<f64> {
    assert_eq!(x.n_rows, y.len());
    let n_pos = y.iter().filter(|l| **l).count();
    let n_neg = y.len() - n_pos;
    assert!(
        n_pos >= 2 && n_neg >= 2,
        "each class needs at least two rows"
    );
    let mut sum_pos = vec![0.0f64; x.n_cols];
    let mut sum_neg = vec![0.0f64; x.n_cols];
    let mut sumsq_pos = vec![0.0f64; x.n_cols];
    let mut sumsq_neg = vec![0.0f64; x.n_cols];
    for (row, &label) in x.rows.iter().zip(y) {
        for &(col, w) in row {
            let c = col as usize;
            if label {
                sum_pos[c] += w;
                sumsq_pos[c] += w * w;
            } else {
                sum_neg[c] += w;
                sumsq_neg[c] += w * w;
            }
        }
    }
    let (np, nn) = (n_pos as f64, n_neg as f64);
    let n = np + nn;
    (0..x.n_cols)
        .map(|c| {
            let mean_pos = sum_pos[c] / np;
            let mean_neg = sum_neg[c] / nn;
            let grand = (sum_pos[c] + sum_neg[c]) / n;
            let ss_between =
                np * (mean_pos - grand).powi(2) + nn * (mean_neg - grand).powi(2);
            let ss_within = (sumsq_pos[c] - np * mean_pos * mean_pos)
                + (sumsq_neg[c] - nn * mean_neg * mean_neg);
            // guard tiny negative values from cancellation
            let ss_within = ss_within.max(0.0);
            let ms_between = ss_between / 1.0;
            let ms_within = ss_within / (n - 2.0);
            if ms_within <= 1e-12 {
                if ms_between <= 1e-12 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                ms_between / ms_within
            }
        })
        .collect()
}

/// Indices of the k largest scores; ties broken by lower column index.
/// The result is sorted ascending for stable projection.
pub fn select_top_k(scores: &[f64], k: usize) -> Vec<usize> {
    assert!(k <= scores.len(), "k exceeds column count");
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.cmp(&b))
    });
    let mut picked: Vec<usize> = order.into_iter().take(k).collect();
    picked.sort_unstable();
    picked
}
