//! Vocabularies, term weighting and feature assembly.
//!
//! The document unit is one child: all consult texts concatenated and
//! preprocessed into a single term sequence.

mod matrix;
mod meta;
mod select;

pub use matrix::{assemble, AssembleInput, ColumnMeta, ColumnOrigin, FeatureMatrix};
pub use meta::{
    meta_features, structured_features, MetaDictionary, MetaFeatureSet, StructuredDictionary,
    AGE_INTERVALS,
};
pub use select::{anova_f_scores, chi2_scores, select_top_k};

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::textprep::TermSequence;
use crate::{Error, Result};

/// Sparse vector entries (column, weight), sorted by column, no zeros.
pub type SparseVec = Vec<(u32, f64)>;

/// Term dictionary with document frequencies over child-documents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Vocabulary {
    /// Terms in rank order (descending total frequency, ties lexicographic).
    pub terms: Vec<String>,
    /// term -> dense index, consistent with `terms`.
    pub term_index: BTreeMap<String, u32>,
    pub df: Vec<u32>,
    pub df_pos: Vec<u32>,
    pub df_neg: Vec<u32>,
    pub n_docs: u32,
    pub n_pos: u32,
    pub n_neg: u32,
    /// Mean document term count (zero-length documents included).
    pub avgdl: f64,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<u32> {
        self.term_index.get(term).copied()
    }
}

/// Number of terms to keep in a vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopK {
    All,
    K(usize),
}

impl Default for TopK {
    fn default() -> Self {
        TopK::All
    }
}

/// Build a vocabulary from per-child term sequences and labels. Terms are
/// ranked by descending total frequency (ties lexicographically ascending);
/// `min_df` drops rare terms before ranking.
pub fn build_vocabulary(
    sequences: &[TermSequence],
    labels: &[bool],
    top_k: TopK,
    min_df: u32,
) -> Vocabulary {
    assert_eq!(
        sequences.len(),
        labels.len(),
        "one label per child document"
    );
    let n_docs = sequences.len() as u32;
    let n_pos = labels.iter().filter(|l| **l).count() as u32;
    let n_neg = n_docs - n_pos;
    let total_terms: usize = sequences.iter().map(|s| s.terms.len()).sum();
    let avgdl = if n_docs == 0 {
        0.0
    } else {
        total_terms as f64 / n_docs as f64
    };

    struct Acc {
        freq: u64,
        df: u32,
        df_pos: u32,
        df_neg: u32,
    }
    let mut table: HashMap<&str, Acc> = HashMap::new();
    let mut seen_in_doc: HashMap<&str, ()> = HashMap::new();
    for (seq, &label) in sequences.iter().zip(labels) {
        seen_in_doc.clear();
        for term in &seq.terms {
            let acc = table.entry(term.as_str()).or_insert(Acc {
                freq: 0,
                df: 0,
                df_pos: 0,
                df_neg: 0,
            });
            acc.freq += 1;
            if seen_in_doc.insert(term.as_str(), ()).is_none() {
                acc.df += 1;
                if label {
                    acc.df_pos += 1;
                } else {
                    acc.df_neg += 1;
                }
            }
        }
    }

    let mut ranked: Vec<(&str, Acc)> = table
        .into_iter()
        .filter(|(_, acc)| acc.df >= min_df)
        .collect();
    ranked.sort_by(|a, b| b.1.freq.cmp(&a.1.freq).then_with(|| a.0.cmp(b.0)));
    if let TopK::K(k) = top_k {
        ranked.truncate(k);
    }

    let mut vocab = Vocabulary {
        terms: Vec::with_capacity(ranked.len()),
        term_index: BTreeMap::new(),
        df: Vec::with_capacity(ranked.len()),
        df_pos: Vec::with_capacity(ranked.len()),
        df_neg: Vec::with_capacity(ranked.len()),
        n_docs,
        n_pos,
        n_neg,
        avgdl,
    };
    for (i, (term, acc)) in ranked.into_iter().enumerate() {
        vocab.terms.push(term.to_string());
        vocab.term_index.insert(term.to_string(), i as u32);
        vocab.df.push(acc.df);
        vocab.df_pos.push(acc.df_pos);
        vocab.df_neg.push(acc.df_neg);
    }
    vocab
}

/// Term weighting schemes for document vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightScheme {
    /// 1 when the term occurs.
    Boolean,
    /// Raw term frequency.
    Count,
    /// (0.5 + 0.5 * tf/max_tf) * ln(N/df): max-tf normalization keeps long
    /// and short files comparable.
    TfidfAugmented,
    /// tf * log2(((df_neg+s) * n_pos) / ((df_pos+s) * n_neg)); the sign
    /// tracks the class imbalance of the term's document frequency.
    DeltaTfidf { smoothing: f64 },
    /// Saturating, length-normalized weighting with the non-negative
    /// "+1 inside the log" idf variant.
    Bm25 { k1: f64, b: f64 },
}

impl WeightScheme {
    pub fn delta_tfidf() -> WeightScheme {
        WeightScheme::DeltaTfidf { smoothing: 1.0 }
    }

    pub fn bm25() -> WeightScheme {
        WeightScheme::Bm25 { k1: 1.2, b: 0.75 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            WeightScheme::Boolean => "boolean",
            WeightScheme::Count => "count",
            WeightScheme::TfidfAugmented => "tfidf_augmented",
            WeightScheme::DeltaTfidf { .. } => "delta_tfidf",
            WeightScheme::Bm25 { .. } => "bm25",
        }
    }
}

/// Weigh one document's term sequence against a vocabulary.
/// Out-of-vocabulary terms are ignored.
pub fn weigh(seq: &TermSequence, vocab: &Vocabulary, scheme: WeightScheme) -> Result<SparseVec> {
    if let WeightScheme::DeltaTfidf { .. } = scheme {
        if vocab.n_pos == 0 || vocab.n_neg == 0 {
            return Err(Error::Config(
                "delta_tfidf needs both class document counts".into(),
            ));
        }
    }

    let mut tf: BTreeMap<u32, u64> = BTreeMap::new();
    for term in &seq.terms {
        if let Some(idx) = vocab.index_of(term) {
            *tf.entry(idx).or_insert(0) += 1;
        }
    }
    if tf.is_empty() {
        return Ok(Vec::new());
    }
    let max_tf = tf.values().copied().max().unwrap_or(1) as f64;
    let doc_len = seq.terms.len() as f64;
    let n_docs = vocab.n_docs as f64;

    let mut out: SparseVec = Vec::with_capacity(tf.len());
    for (idx, count) in tf {
        let tf_val = count as f64;
        let df = vocab.df[idx as usize] as f64;
        let weight = match scheme {
            WeightScheme::Boolean => 1.0,
            WeightScheme::Count => tf_val,
            WeightScheme::TfidfAugmented => {
                (0.5 + 0.5 * tf_val / max_tf) * (n_docs / df).ln()
            }
            WeightScheme::DeltaTfidf { smoothing } => {
                let df_pos = vocab.df_pos[idx as usize] as f64;
                let df_neg = vocab.df_neg[idx as usize] as f64;
                let ratio = ((df_neg + smoothing) * vocab.n_pos as f64)
                    / ((df_pos + smoothing) * vocab.n_neg as f64);
                tf_val * ratio.log2()
            }
            WeightScheme::Bm25 { k1, b } => {
                let idf = (((n_docs - df + 0.5) / (df + 0.5)) + 1.0).ln();
                let norm = tf_val + k1 * (1.0 - b + b * doc_len / vocab.avgdl);
                idf * tf_val * (k1 + 1.0) / norm
            }
        };
        if weight != 0.0 {
            out.push((idx, weight));
        }
    }
    Ok(out)
}
