//! From-scratch classifiers behind one spec/score interface, plus the
//! two-member soft-voting ensemble.

mod forest;
mod nb;
mod svm;

pub use forest::{ForestModel, MaxFeatures, Node, Tree};
pub use nb::{BernoulliNbModel, MultinomialNbModel};
pub use svm::{
    fit_logistic_link, train_svm, Kernel, KernelParams, SvmDiagnostics, SvmModel,
};

use serde::{Deserialize, Serialize};

use crate::vectorize::{FeatureMatrix, SparseVec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    BernoulliNb,
    MultinomialNb,
    RandomForest,
    Svm,
}

/// Algorithm choice plus hyperparameters. Fields outside the chosen
/// algorithm are ignored but validated for range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSpec {
    pub algorithm: Algorithm,
    /// Laplace (1) or Lidstone (0..1) smoothing.
    pub nb_alpha: f64,
    pub rf_n_trees: usize,
    pub rf_max_features: MaxFeatures,
    pub rf_bootstrap: bool,
    pub svm_kernel: Kernel,
    pub svm_c: f64,
    pub poly_degree: u32,
    /// Defaults to 1/n_cols when unset.
    pub rbf_gamma: Option<f64>,
    pub seed: u64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            algorithm: Algorithm::RandomForest,
            nb_alpha: 1.0,
            rf_n_trees: 100,
            rf_max_features: MaxFeatures::Sqrt,
            rf_bootstrap: true,
            svm_kernel: Kernel::Linear,
            svm_c: 1.0,
            poly_degree: 3,
            rbf_gamma: None,
            seed: 0,
        }
    }
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nb_alpha < 0.0 {
            return Err(Error::Config("nb_alpha must be >= 0".into()));
        }
        if self.rf_n_trees == 0 {
            return Err(Error::Config("rf_n_trees must be >= 1".into()));
        }
        if self.svm_c <= 0.0 {
            return Err(Error::Config("svm_c must be > 0".into()));
        }
        if let Some(g) = self.rbf_gamma {
            if g <= 0.0 {
                return Err(Error::Config("rbf_gamma must be > 0".into()));
            }
        }
        if self.poly_degree == 0 {
            return Err(Error::Config("poly_degree must be >= 1".into()));
        }
        Ok(())
    }

    pub fn kernel_params(&self, n_cols: usize) -> KernelParams {
        KernelParams {
            kernel: self.svm_kernel,
            gamma: self
                .rbf_gamma
                .unwrap_or_else(|| 1.0 / (n_cols.max(1) as f64)),
            degree: self.poly_degree,
        }
    }
}

/// A fitted scorer; every variant yields a positive-class score in [0, 1].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum TrainedModel {
    BernoulliNb(BernoulliNbModel),
    MultinomialNb(MultinomialNbModel),
    RandomForest(ForestModel),
    Svm(SvmModel),
}

impl TrainedModel {
    pub fn score(&self, x: &SparseVec) -> f64 {
        match self {
            TrainedModel::BernoulliNb(m) => m.score(x),
            TrainedModel::MultinomialNb(m) => m.score(x),
            TrainedModel::RandomForest(m) => m.score(x),
            TrainedModel::Svm(m) => m.score(x),
        }
    }

    /// Flag decision at a threshold (default 0.5 upstream).
    pub fn predict(&self, x: &SparseVec, threshold: f64) -> bool {
        self.score(x) >= threshold
    }

    pub fn n_features(&self) -> usize {
        match self {
            TrainedModel::BernoulliNb(m) => m.n_features,
            TrainedModel::MultinomialNb(m) => m.n_features,
            TrainedModel::RandomForest(m) => m.n_features,
            TrainedModel::Svm(m) => m.n_features,
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            TrainedModel::BernoulliNb(_) => Algorithm::BernoulliNb,
            TrainedModel::MultinomialNb(_) => Algorithm::MultinomialNb,
            TrainedModel::RandomForest(_) => Algorithm::RandomForest,
            TrainedModel::Svm(_) => Algorithm::Svm,
        }
    }
}

/// Fit the algorithm named by the spec.
pub fn train(x: &FeatureMatrix, y: &[bool], spec: &ModelSpec) -> Result<TrainedModel> {
    spec.validate()?;
    match spec.algorithm {
        Algorithm::BernoulliNb => Ok(TrainedModel::BernoulliNb(nb::train_bernoulli(
            x,
            y,
            spec.nb_alpha,
        )?)),
        Algorithm::MultinomialNb => Ok(TrainedModel::MultinomialNb(nb::train_multinomial(
            x,
            y,
            spec.nb_alpha,
        )?)),
        Algorithm::RandomForest => Ok(TrainedModel::RandomForest(forest::train_forest(
            x,
            y,
            spec.rf_n_trees,
            spec.rf_max_features,
            spec.rf_bootstrap,
            spec.seed,
        )?)),
        Algorithm::Svm => {
            let params = spec.kernel_params(x.n_cols);
            let (model, _diag) = svm::train_svm(x, y, params, spec.svm_c, spec.seed)?;
            Ok(TrainedModel::Svm(model))
        }
    }
}

/// Weighted soft-vote over member scores; weights must sum to 1.
pub fn ensemble_score(scores: &[f64], weights: &[f64]) -> f64 {
    assert_eq!(scores.len(), weights.len());
    debug_assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    scores.iter().zip(weights).map(|(s, w)| s * w).sum()
}
