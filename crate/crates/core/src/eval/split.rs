//! Random undersampling split protocol.
//!
//! Training takes a balanced sample (by default half of the positive
//! group, capped at 325 per class, mirroring the published protocol);
//! the test set keeps every remaining positive plus a negative sample
//! sized to restore the population imbalance.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Cap applied to the default per-class training count.
pub const DEFAULT_TRAIN_CAP: usize = 325;
pub const DEFAULT_NEG_TEST_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingOptions {
    /// Positive training count; `None` = min(325, p'/2).
    pub train_pos: Option<usize>,
    /// Negative training count; `None` = same as the positive count.
    pub train_neg: Option<usize>,
    /// Fraction of leftover negatives sampled into the test set.
    pub neg_test_fraction: f64,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions {
            train_pos: None,
            train_neg: None,
            neg_test_fraction: DEFAULT_NEG_TEST_FRACTION,
        }
    }
}

/// Resolved class counts for one split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub p_prime: usize,
    pub n_prime: usize,
    pub p_train: usize,
    pub n_train: usize,
    pub p_test: usize,
    pub n_test: usize,
    pub seed: u64,
}

impl SamplingPlan {
    pub fn from_labels(
        labels: &[bool],
        options: &SamplingOptions,
        seed: u64,
    ) -> Result<SamplingPlan> {
        let p_prime = labels.iter().filter(|l| **l).count();
        let n_prime = labels.len() - p_prime;
        Self::from_counts(p_prime, n_prime, options, seed)
    }

    pub fn from_counts(
        p_prime: usize,
        n_prime: usize,
        options: &SamplingOptions,
        seed: u64,
    ) -> Result<SamplingPlan> {
        if !(0.0..=1.0).contains(&options.neg_test_fraction) {
            return Err(Error::InvalidArgument(
                "neg_test_fraction must be in [0, 1]".into(),
            ));
        }
        let p_train = options
            .train_pos
            .unwrap_or_else(|| (p_prime / 2).min(DEFAULT_TRAIN_CAP));
        let n_train = options.train_neg.unwrap_or(p_train);
        if p_train == 0 || p_train > p_prime {
            return Err(Error::InvalidArgument(format!(
                "infeasible plan: p_train={p_train} with p'={p_prime}"
            )));
        }
        if n_train > n_prime {
            return Err(Error::InvalidArgument(format!(
                "infeasible plan: n_train={n_train} with n'={n_prime}"
            )));
        }
        let p_test = p_prime - p_train;
        let n_test = (options.neg_test_fraction * (n_prime - n_train) as f64).floor() as usize;
        Ok(SamplingPlan {
            p_prime,
            n_prime,
            p_train,
            n_train,
            p_test,
            n_test,
            seed,
        })
    }

    /// No positive rows left for testing.
    pub fn exhausts_positives(&self) -> bool {
        self.p_test == 0
    }
}

/// Materialize a plan into disjoint train and test index sets.
/// Deterministic per plan seed.
pub fn undersample_split(
    labels: &[bool],
    plan: &SamplingPlan,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let positives: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let negatives: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    if positives.len() != plan.p_prime || negatives.len() != plan.n_prime {
        return Err(Error::InvalidArgument(
            "plan was built for different label counts".into(),
        ));
    }

    let mut rng = ChaCha12Rng::seed_from_u64(plan.seed);
    let train_pos_picks = sample(&mut rng, positives.len(), plan.p_train);
    let train_neg_picks = sample(&mut rng, negatives.len(), plan.n_train);

    let mut in_train_pos = vec![false; positives.len()];
    for i in train_pos_picks.iter() {
        in_train_pos[i] = true;
    }
    let mut in_train_neg = vec![false; negatives.len()];
    for i in train_neg_picks.iter() {
        in_train_neg[i] = true;
    }

    let mut train: Vec<usize> = Vec::with_capacity(plan.p_train + plan.n_train);
    train.extend((0..positives.len()).filter(|&i| in_train_pos[i]).map(|i| positives[i]));
    train.extend((0..negatives.len()).filter(|&i| in_train_neg[i]).map(|i| negatives[i]));

    let remaining_neg: Vec<usize> = (0..negatives.len())
        .filter(|&i| !in_train_neg[i])
        .map(|i| negatives[i])
        .collect();
    let test_neg_picks = sample(&mut rng, remaining_neg.len(), plan.n_test);
    let mut picked = vec![false; remaining_neg.len()];
    for i in test_neg_picks.iter() {
        picked[i] = true;
    }

    let mut test: Vec<usize> = Vec::with_capacity(plan.p_test + plan.n_test);
    test.extend((0..positives.len()).filter(|&i| !in_train_pos[i]).map(|i| positives[i]));
    test.extend((0..remaining_neg.len()).filter(|&i| picked[i]).map(|i| remaining_neg[i]));

    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(p: usize, n: usize) -> Vec<bool> {
        let mut v = vec![true; p];
        v.extend(vec![false; n]);
        v
    }

    #[test]
    fn published_counts_reproduce_under_defaults() {
        let plan =
            SamplingPlan::from_counts(657, 13137, &SamplingOptions::default(), 1).unwrap();
        assert_eq!(plan.p_train, 325);
        assert_eq!(plan.n_train, 325);
        assert_eq!(plan.p_test, 332);
        assert_eq!(plan.n_test, 6406);
        let ratio = plan.n_test as f64 / plan.p_test as f64;
        assert!((19.0..=21.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn small_positive_group_defaults_to_half()
    {
        let plan = SamplingPlan::from_counts(198, 12972, &SamplingOptions::default(), 1).unwrap();
        assert_eq!(plan.p_train, 99);
        assert_eq!(plan.n_train, 99);
        assert_eq!(plan.p_test, 99);
    }

    #[test]
    fn split_sets_are_disjoint_with_planned_sizes() {
        let y = labels(657, 13137);
        let plan = SamplingPlan::from_labels(&y, &SamplingOptions::default(), 42).unwrap();
        let (train, test) = undersample_split(&y, &plan).unwrap();
        assert_eq!(train.len(), plan.p_train + plan.n_train);
        assert_eq!(test.len(), plan.p_test + plan.n_test);
        let train_set: std::collections::HashSet<_> = train.iter().collect();
        assert!(test.iter().all(|i| !train_set.contains(i)));
        let train_pos = train.iter().filter(|&&i| y[i]).count();
        assert_eq!(train_pos, plan.p_train);
        let test_pos = test.iter().filter(|&&i| y[i]).count();
        assert_eq!(test_pos, plan.p_test);
    }

    #[test]
    fn same_seed_reproduces_different_seeds_differ() {
        let y = labels(100, 1000);
        let options = SamplingOptions::default();
        let plan_a = SamplingPlan::from_labels(&y, &options, 5).unwrap();
        let (train_a, test_a) = undersample_split(&y, &plan_a).unwrap();
        let (train_b, test_b) = undersample_split(&y, &plan_a).unwrap();
        assert_eq!(train_a, train_b);
        assert_eq!(test_a, test_b);
        let plan_c = SamplingPlan::from_labels(&y, &options, 6).unwrap();
        let (train_c, _) = undersample_split(&y, &plan_c).unwrap();
        assert_ne!(train_a, train_c);
        assert_eq!(train_a.len(), train_c.len());
    }

    #[test]
    fn exhausting_positives_is_flagged_not_fatal() {
        let y = labels(10, 100);
        let options = SamplingOptions {
            train_pos: Some(10),
            train_neg: Some(10),
            neg_test_fraction: 0.5,
        };
        let plan = SamplingPlan::from_labels(&y, &options, 1).unwrap();
        assert!(plan.exhausts_positives());
        let (_, test) = undersample_split(&y, &plan).unwrap();
        assert!(test.iter().all(|&i| !y[i]));
    }

    #[test]
    fn infeasible_counts_are_errors() {
        let y = labels(10, 100);
        let options = SamplingOptions {
            train_pos: Some(11),
            train_neg: None,
            neg_test_fraction: 0.5,
        };
        assert!(SamplingPlan::from_labels(&y, &options, 1).is_err());
        let options = SamplingOptions {
            train_pos: Some(5),
            train_neg: Some(101),
            neg_test_fraction: 0.5,
        };
        assert!(SamplingPlan::from_labels(&y, &options, 1).is_err());
    }

    #[test]
    fn fold_train_sets_differ_across_seeds() {
        let y = labels(60, 600);
        let options = SamplingOptions::default();
        let mut seen = std::collections::HashSet::new();
        for fold in 0..10u64 {
            let plan = SamplingPlan::from_labels(&y, &options, 100 + fold).unwrap();
            let (train, _) = undersample_split(&y, &plan).unwrap();
            assert!(seen.insert(train), "fold {fold} duplicated a train set");
        }
    }
}
