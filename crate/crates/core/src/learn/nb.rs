//! Naive Bayes classifiers (Bernoulli and multinomial) with Laplace or
//! Lidstone smoothing.

use serde::{Deserialize, Serialize};

use crate::vectorize::{FeatureMatrix, SparseVec};
use crate::{Error, Result};

/// Bernoulli model over binarized features (presence = non-zero weight).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BernoulliNbModel {
    pub n_features: usize,
    pub log_prior_pos: f64,
    pub log_prior_neg: f64,
    /// log P(feature present | class)
    pub log_p_pos: Vec<f64>,
    pub log_p_neg: Vec<f64>,
    /// log P(feature absent | class)
    pub log_1mp_pos: Vec<f64>,
    pub log_1mp_neg: Vec<f64>,
    /// Sum over features of log P(absent | class); base of the sparse score.
    pub base_pos: f64,
    pub base_neg: f64,
}

fn class_counts(y: &[bool]) -> Result<(f64, f64)> {
    let n_pos = y.iter().filter(|l| **l).count();
    let n_neg = y.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Training(
            "training data must contain both classes".into(),
        ));
    }
    Ok((n_pos as f64, n_neg as f64))
}

pub fn train_bernoulli(x: &FeatureMatrix, y: &[bool], alpha: f64) -> Result<BernoulliNbModel> {
    assert_eq!(x.n_rows, y.len());
    if alpha < 0.0 {
        return Err(Error::Config("smoothing alpha must be >= 0".into()));
    }
    let (n_pos, n_neg) = class_counts(y)?;
    let mut present_pos = vec![0.0f64; x.n_cols];
    let mut present_neg = vec![0.0f64; x.n_cols];
    for (row, &label) in x.rows.iter().zip(y) {
        for &(col, w) in row {
            if w != 0.0 {
                if label {
                    present_pos[col as usize] += 1.0;
                } else {
                    present_neg[col as usize] += 1.0;
                }
            }
        }
    }
    let n = n_pos + n_neg;
    let mut model = BernoulliNbModel {
        n_features: x.n_cols,
        log_prior_pos: (n_pos / n).ln(),
        log_prior_neg: (n_neg / n).ln(),
        log_p_pos: Vec::with_capacity(x.n_cols),
        log_p_neg: Vec::with_capacity(x.n_cols),
        log_1mp_pos: Vec::with_capacity(x.n_cols),
        log_1mp_neg: Vec::with_capacity(x.n_cols),
        base_pos: 0.0,
        base_neg: 0.0,
    };
    for c in 0..x.n_cols {
        let p_pos = (present_pos[c] + alpha) / (n_pos + 2.0 * alpha);
        let p_neg = (present_neg[c] + alpha) / (n_neg + 2.0 * alpha);
        model.log_p_pos.push(p_pos.ln());
        model.log_p_neg.push(p_neg.ln());
        model.log_1mp_pos.push((1.0 - p_pos).ln());
        model.log_1mp_neg.push((1.0 - p_neg).ln());
        model.base_pos += (1.0 - p_pos).ln();
        model.base_neg += (1.0 - p_neg).ln();
    }
    Ok(model)
}

impl BernoulliNbModel {
    /// Posterior probability of the positive class.
    pub fn score(&self, x: &SparseVec) -> f64 {
        let mut log_pos = self.log_prior_pos + self.base_pos;
        let mut log_neg = self.log_prior_neg + self.base_neg;
        for &(col, w) in x {
            if w != 0.0 && (col as usize) < self.n_features {
                let c = col as usize;
                // swap absent-term for present-term
                log_pos += self.log_p_pos[c] - self.log_1mp_pos[c];
                log_neg += self.log_p_neg[c] - self.log_1mp_neg[c];
            }
        }
        posterior(log_pos, log_neg)
    }
}

/// Multinomial model over non-negative weighted features.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultinomialNbModel {
    pub n_features: usize,
    pub log_prior_pos: f64,
    pub log_prior_neg: f64,
    /// log P(term | class)
    pub log_p_pos: Vec<f64>,
    pub log_p_neg: Vec<f64>,
}

pub fn train_multinomial(x: &FeatureMatrix, y: &[bool], alpha: f64) -> Result<MultinomialNbModel> {
    assert_eq!(x.n_rows, y.len());
    if alpha < 0.0 {
        return Err(Error::Config("smoothing alpha must be >= 0".into()));
    }
    let (n_pos, n_neg) = class_counts(y)?;
    let mut sum_pos = vec![0.0f64; x.n_cols];
    let mut sum_neg = vec![0.0f64; x.n_cols];
    for (row, &label) in x.rows.iter().zip(y) {
        for &(col, w) in row {
            if w < 0.0 {
                return Err(Error::Training(
                    "multinomial naive bayes needs non-negative feature weights".into(),
                ));
            }
            if label {
                sum_pos[col as usize] += w;
            } else {
                sum_neg[col as usize] += w;
            }
        }
    }
    let total_pos: f64 = sum_pos.iter().sum();
    let total_neg: f64 = sum_neg.iter().sum();
    let v = x.n_cols as f64;
    if alpha == 0.0 && (total_pos == 0.0 || total_neg == 0.0) {
        return Err(Error::Training(
            "multinomial naive bayes with alpha=0 needs term mass in both classes".into(),
        ));
    }
    let n = n_pos + n_neg;
    let model = MultinomialNbModel {
        n_features: x.n_cols,
        log_prior_pos: (n_pos / n).ln(),
        log_prior_neg: (n_neg / n).ln(),
        log_p_pos: sum_pos
            .iter()
            .map(|s| ((s + alpha) / (total_pos + alpha * v)).ln())
            .collect(),
        log_p_neg: sum_neg
            .iter()
            .map(|s| ((s + alpha) / (total_neg + alpha * v)).ln())
            .collect(),
    };
    Ok(model)
}

impl MultinomialNbModel {
    pub fn score(&self, x: &SparseVec) -> f64 {
        let mut log_pos = self.log_prior_pos;
        let mut log_neg = self.log_prior_neg;
        for &(col, w) in x {
            if (col as usize) < self.n_features && w > 0.0 {
                log_pos += w * self.log_p_pos[col as usize];
                log_neg += w * self.log_p_neg[col as usize];
            }
        }
        posterior(log_pos, log_neg)
    }
}

/// Normalized positive-class posterior from class log-joints.
fn posterior(log_pos: f64, log_neg: f64) -> f64 {
    let m = log_pos.max(log_neg);
    let pos = (log_pos - m).exp();
    let neg = (log_neg - m).exp();
    pos / (pos + neg)
}
