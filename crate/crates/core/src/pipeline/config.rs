//! Declarative pipeline configuration, shared by train, grid, eval and
//! serve so that a served model is exactly a trained config.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::eval::SamplingOptions;
use crate::learn::ModelSpec;
use crate::textprep::PrepConfig;
use crate::vectorize::WeightScheme;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrepOptions {
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub stemming: bool,
    /// Replacement-rule table (pattern;replacement); embedded seed rules
    /// when unset.
    pub rules: Option<String>,
    /// Stopword list path; embedded standard list when unset.
    pub stopwords: Option<String>,
}

impl Default for PrepOptions {
    fn default() -> Self {
        PrepOptions {
            ngram_min: 1,
            ngram_max: 1,
            stemming: true,
            rules: None,
            stopwords: None,
        }
    }
}

impl PrepOptions {
    pub fn build(&self, base_dir: Option<&Path>) -> Result<PrepConfig> {
        let mut config = PrepConfig {
            ngram_min: self.ngram_min,
            ngram_max: self.ngram_max,
            stemming: self.stemming,
            ..PrepConfig::default()
        };
        let resolve = |raw: &str| -> std::path::PathBuf {
            let p = Path::new(raw);
            match (p.is_absolute(), base_dir) {
                (false, Some(dir)) => dir.join(p),
                _ => p.to_path_buf(),
            }
        };
        if let Some(path) = &self.rules {
            config.load_rules(&resolve(path))?;
        }
        if let Some(path) = &self.stopwords {
            config.load_stopwords(&resolve(path))?;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectorKind {
    None,
    Chi2,
    Anova,
}

/// Feature layout of one model member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    /// Include term (bag-of-words) features.
    pub terms: bool,
    /// Vocabulary size cap; `None` keeps every term.
    pub top_k: Option<usize>,
    pub min_df: u32,
    /// boolean | count | tfidf_augmented | delta_tfidf | bm25
    pub weighting: String,
    pub bm25_k1: f64,
    pub bm25_b: f64,
    pub delta_smoothing: f64,
    /// none | chi2 | anova, applied to term columns on training rows only.
    pub selector: String,
    pub k_features: Option<usize>,
    /// Append summarizing features.
    pub meta: bool,
    /// Append structured-observation features.
    pub structured: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            terms: true,
            top_k: Some(1000),
            min_df: 1,
            weighting: "tfidf_augmented".into(),
            bm25_k1: 1.2,
            bm25_b: 0.75,
            delta_smoothing: 1.0,
            selector: "none".into(),
            k_features: None,
            meta: false,
            structured: false,
        }
    }
}

impl FeatureConfig {
    /// A structured-data-only member (the ensemble's second voter).
    pub fn structured_only() -> Self {
        FeatureConfig {
            terms: false,
            meta: false,
            structured: true,
            ..FeatureConfig::default()
        }
    }

    pub fn scheme(&self) -> Result<WeightScheme> {
        match self.weighting.as_str() {
            "boolean" => Ok(WeightScheme::Boolean),
            "count" => Ok(WeightScheme::Count),
            "tfidf_augmented" | "tfidf" => Ok(WeightScheme::TfidfAugmented),
            "delta_tfidf" => Ok(WeightScheme::DeltaTfidf {
                smoothing: self.delta_smoothing,
            }),
            "bm25" => Ok(WeightScheme::Bm25 {
                k1: self.bm25_k1,
                b: self.bm25_b,
            }),
            other => Err(Error::Config(format!("unknown weighting '{other}'"))),
        }
    }

    pub fn selector_kind(&self) -> Result<SelectorKind> {
        match self.selector.as_str() {
            "none" => Ok(SelectorKind::None),
            "chi2" => Ok(SelectorKind::Chi2),
            "anova" => Ok(SelectorKind::Anova),
            other => Err(Error::Config(format!("unknown selector '{other}'"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme()?;
        let kind = self.selector_kind()?;
        if kind != SelectorKind::None && self.k_features.is_none() {
            return Err(Error::Config(
                "selector requires k_features".into(),
            ));
        }
        if !self.terms && !self.meta && !self.structured {
            return Err(Error::Config(
                "member has no feature blocks enabled".into(),
            ));
        }
        Ok(())
    }
}

/// One model member: feature layout plus algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberConfig {
    #[serde(flatten)]
    pub spec: ModelSpec,
    #[serde(default)]
    pub features: FeatureConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    #[serde(default = "default_weight")]
    pub weight_unstructured: f64,
    pub unstructured: MemberConfig,
    pub structured: MemberConfig,
}

fn default_weight() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub threshold: f64,
    pub prep: PrepOptions,
    pub sampling: SamplingOptions,
    pub model: Option<MemberConfig>,
    pub ensemble: Option<EnsembleConfig>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            threshold: 0.5,
            prep: PrepOptions::default(),
            sampling: SamplingOptions::default(),
            model: None,
            ensemble: None,
        }
    }
}

impl PipelineConfig {
    /// A single-member config with defaults.
    pub fn single(member: MemberConfig) -> Self {
        PipelineConfig {
            model: Some(member),
            ..PipelineConfig::default()
        }
    }

    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path)?;
        let config: PipelineConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::Config("threshold must be in [0, 1]".into()));
        }
        match (&self.model, &self.ensemble) {
            (Some(member), None) => {
                member.spec.validate()?;
                member.features.validate()?;
            }
            (None, Some(ensemble)) => {
                if !(0.0..=1.0).contains(&ensemble.weight_unstructured) {
                    return Err(Error::Config(
                        "weight_unstructured must be in [0, 1]".into(),
                    ));
                }
                ensemble.unstructured.spec.validate()?;
                ensemble.unstructured.features.validate()?;
                ensemble.structured.spec.validate()?;
                ensemble.structured.features.validate()?;
            }
            (None, None) => {
                return Err(Error::Config(
                    "config needs a [model] or an [ensemble] section".into(),
                ))
            }
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "config cannot have both [model] and [ensemble]".into(),
                ))
            }
        }
        Ok(())
    }
}
