//! Corpus-level descriptive statistics.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use super::Corpus;
use crate::textprep;

#[derive(Debug, Clone, Serialize)]
pub struct CorpusStats {
    pub n_children: usize,
    pub n_consults: usize,
    pub avg_consults_per_child: f64,
    pub avg_words_per_consult: f64,
    /// Distinct tokens / total tokens over a seeded random consult sample.
    pub lexical_diversity_sampled: f64,
    pub lexical_diversity_sampled_no_stopwords: f64,
}

/// Compute corpus statistics; lexical diversity uses a seeded random sample
/// of `sample_size` consults (clamped to the corpus size).
pub fn corpus_stats(corpus: &Corpus, sample_size: usize, seed: u64) -> CorpusStats {
    let n_children = corpus.children.len();
    let n_consults: usize = corpus.children.iter().map(|c| c.consults.len()).sum();
    if n_children == 0 {
        return CorpusStats {
            n_children: 0,
            n_consults: 0,
            avg_consults_per_child: 0.0,
            avg_words_per_consult: 0.0,
            lexical_diversity_sampled: 0.0,
            lexical_diversity_sampled_no_stopwords: 0.0,
        };
    }

    let total_words: usize = corpus
        .children
        .iter()
        .flat_map(|c| c.consults.iter())
        .map(|n| n.text.split_whitespace().count())
        .sum();

    let mut all_texts: Vec<&str> = corpus
        .children
        .iter()
        .flat_map(|c| c.consults.iter().map(|n| n.text.as_str()))
        .collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    all_texts.shuffle(&mut rng);
    let sample = &all_texts[..sample_size.min(all_texts.len())];

    let stopwords: std::collections::BTreeSet<String> = textprep::STOPWORDS_NL
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect();

    let diversity = |drop_stopwords: bool| -> f64 {
        let mut total = 0usize;
        let mut distinct = std::collections::HashSet::new();
        for text in sample {
            for token in textprep::tokenize(text) {
                if drop_stopwords && stopwords.contains(&token) {
                    continue;
                }
                total += 1;
                distinct.insert(token);
            }
        }
        if total == 0 {
            0.0
        } else {
            distinct.len() as f64 / total as f64
        }
    };

    CorpusStats {
        n_children,
        n_consults,
        avg_consults_per_child: n_consults as f64 / n_children as f64,
        avg_words_per_consult: if n_consults == 0 {
            0.0
        } else {
            total_words as f64 / n_consults as f64
        },
        lexical_diversity_sampled: diversity(false),
        lexical_diversity_sampled_no_stopwords: diversity(true),
    }
}
