//! Normalization of raw consult notes into term sequences.
//!
//! Stage order: regex replacements on the raw text (so acronym rules can
//! use case and punctuation cues), trivial-word removal, lowercasing and
//! punctuation stripping, whitespace tokenization, stopword filtering with
//! a negation whitelist, stemming, n-gram expansion.

mod replace;
pub mod stem;

pub use replace::{
    extract_abbreviation_candidates, AbbreviationCandidate, CompiledRules, ReplacementRule,
};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Embedded standard Dutch stopword list, one word per line.
pub const STOPWORDS_NL: &str = include_str!("../../data/stopwords_nl.txt");
/// Embedded seed replacement rules (pattern;replacement;note).
pub const REPLACEMENTS_SEED: &str = include_str!("../../data/replacements_seed.csv");

/// An ordered sequence of lowercase terms (tokens or joined n-grams).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermSequence {
    pub terms: Vec<String>,
}

impl TermSequence {
    pub fn empty() -> Self {
        TermSequence { terms: Vec::new() }
    }
}

/// Full preprocessing configuration; serialized into model artifacts so a
/// trained model is self-contained.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrepConfig {
    pub rules: Vec<ReplacementRule>,
    pub stopwords: BTreeSet<String>,
    /// Stopwords kept anyway so that n-grams retain negated phrases.
    pub negation_whitelist: BTreeSet<String>,
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub stemming: bool,
}

impl Default for PrepConfig {
    fn default() -> Self {
        PrepConfig {
            rules: ReplacementRule::parse_table(REPLACEMENTS_SEED).expect("embedded seed rules"),
            stopwords: STOPWORDS_NL
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_string)
                .collect(),
            negation_whitelist: ["niet", "geen", "nooit", "zonder"]
                .into_iter()
                .map(str::to_string)
                .collect(),
            ngram_min: 1,
            ngram_max: 1,
            stemming: true,
        }
    }
}

impl PrepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ngram_min < 1 || self.ngram_min > self.ngram_max || self.ngram_max > 3 {
            return Err(Error::Config(format!(
                "ngram range {}..{} outside 1..3",
                self.ngram_min, self.ngram_max
            )));
        }
        for rule in &self.rules {
            rule.validate()?;
        }
        Ok(())
    }

    pub fn load_stopwords(&mut self, path: &std::path::Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.stopwords = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect();
        Ok(())
    }

    pub fn load_rules(&mut self, path: &std::path::Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.rules = ReplacementRule::parse_table(&text)?;
        Ok(())
    }
}

/// Compiled, reusable preprocessor. Pure and thread-safe.
pub struct Preprocessor {
    config: PrepConfig,
    rules: CompiledRules,
    trivial: TrivialPatterns,
}

impl Preprocessor {
    pub fn new(config: PrepConfig) -> Result<Self> {
        config.validate()?;
        let rules = CompiledRules::compile(&config.rules)?;
        Ok(Preprocessor {
            config,
            rules,
            trivial: TrivialPatterns::new(),
        })
    }

    pub fn config(&self) -> &PrepConfig {
        &self.config
    }

    /// Count of rule applications skipped by the runaway-growth guard.
    pub fn skipped_rule_applications(&self) -> u64 {
        self.rules.skipped()
    }

    /// Raw text to final term sequence.
    pub fn preprocess(&self, text: &str) -> TermSequence {
        let replaced = self.rules.apply(text);
        let cleaned = self.trivial.remove(&replaced);
        let normalized = normalize_letters(&cleaned);
        let tokens = tokenize(&normalized);
        let kept = remove_stopwords(
            tokens,
            &self.config.stopwords,
            &self.config.negation_whitelist,
        );
        let stemmed: Vec<String> = if self.config.stemming {
            kept.iter().map(|t| stem::stem(t)).collect()
        } else {
            kept
        };
        ngrams(&stemmed, self.config.ngram_min, self.config.ngram_max)
    }
}

struct TrivialPatterns {
    time_expr: regex::Regex,
    date_expr: regex::Regex,
    digit_word: regex::Regex,
}

impl TrivialPatterns {
    fn new() -> Self {
        TrivialPatterns {
            time_expr: regex::Regex::new(r"(?i)\b(?:om\s+)?\d{1,2}[:.]\d{2}(?:\s*uur)?\b")
                .expect("time pattern"),
            date_expr: regex::Regex::new(r"(?i)\b(?:op\s+)?\d{1,4}[-/]\d{1,2}[-/]\d{1,4}\b")
                .expect("date pattern"),
            digit_word: regex::Regex::new(r"\S*\d\S*").expect("digit pattern"),
        }
    }

    fn remove(&self, text: &str) -> String {
        let t = self.time_expr.replace_all(text, " ");
        let t = self.date_expr.replace_all(&t, " ");
        let t = self.digit_word.replace_all(&t, " ");
        collapse_whitespace(&t)
    }
}

/// Remove date/time expressions, bare numbers and digit-bearing words;
/// collapse whitespace to single spaces.
pub fn remove_trivial(text: &str) -> String {
    TrivialPatterns::new().remove(text)
}

fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Lowercase, fold accented vowels to their base letter, and replace every
/// character outside [a-z ] with a space.
fn normalize_letters(text: &str) -> String {
    text.chars()
        .flat_map(char::to_lowercase)
        .map(|c| match c {
            'ä' | 'á' | 'à' | 'â' => 'a',
            'ë' | 'é' | 'è' | 'ê' => 'e',
            'ï' | 'í' | 'ì' | 'î' => 'i',
            'ö' | 'ó' | 'ò' | 'ô' => 'o',
            'ü' | 'ú' | 'ù' | 'û' => 'u',
            'a'..='z' | ' ' => c,
            _ => ' ',
        })
        .collect()
}

/// Split normalized text on whitespace, lowercasing on the way.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| t.to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

/// Drop stopwords, keeping whitelisted negations; order preserved.
pub fn remove_stopwords(
    tokens: Vec<String>,
    stopwords: &BTreeSet<String>,
    whitelist: &BTreeSet<String>,
) -> Vec<String> {
    tokens
        .into_iter()
        .filter(|t| whitelist.contains(t) || !stopwords.contains(t))
        .collect()
}

/// All contiguous n-grams for n in [min, max], joined with '_', in document
/// order: first all n=min grams, then n=min+1, and so on.
pub fn ngrams(tokens: &[String], min: usize, max: usize) -> TermSequence {
    assert!(min >= 1 && min <= max, "ngram range {min}..{max}");
    if min == 1 && max == 1 {
        return TermSequence {
            terms: tokens.to_vec(),
        };
    }
    let mut terms = Vec::new();
    for n in min..=max {
        if tokens.len() >= n {
            for window in tokens.windows(n) {
                terms.push(window.join("_"));
            }
        }
    }
    TermSequence { terms }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prep() -> Preprocessor {
        Preprocessor::new(PrepConfig::default()).unwrap()
    }

    #[test]
    fn trivial_removal_strips_dates_times_and_digit_words() {
        assert_eq!(remove_trivial("a180ml om 12:30 op 01-02-2014"), "");
        assert_eq!(remove_trivial("prima kind"), "prima kind");
        assert_eq!(remove_trivial("4/5flesjes kv"), "kv");
    }

    #[test]
    fn tokenize_lowercases_and_collapses() {
        assert_eq!(tokenize("prima kind"), vec!["prima", "kind"]);
        assert_eq!(tokenize("  a  b "), vec!["a", "b"]);
        assert_eq!(tokenize("Fors aangekomen"), vec!["fors", "aangekomen"]);
    }

    #[test]
    fn stopword_removal_keeps_negations() {
        let cfg = PrepConfig::default();
        let toks = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert_eq!(
            remove_stopwords(toks(&["niet", "goed"]), &cfg.stopwords, &cfg.negation_whitelist),
            toks(&["niet", "goed"])
        );
        assert_eq!(
            remove_stopwords(toks(&["de", "het", "een"]), &cfg.stopwords, &cfg.negation_whitelist),
            Vec::<String>::new()
        );
        assert_eq!(
            remove_stopwords(toks(&["geen", "de", "zorgen"]), &cfg.stopwords, &cfg.negation_whitelist),
            toks(&["geen", "zorgen"])
        );
    }

    #[test]
    fn ngram_enumeration() {
        let toks: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        assert_eq!(ngrams(&toks, 1, 1).terms, vec!["a", "b", "c"]);
        assert_eq!(
            ngrams(&toks, 1, 2).terms,
            vec!["a", "b", "c", "a_b", "b_c"]
        );
        let one: Vec<String> = vec!["a".to_string()];
        assert!(ngrams(&one, 2, 3).terms.is_empty());
    }

    #[test]
    fn ngram_count_formula_holds() {
        // count = sum over n of max(0, len - n + 1)
        for len in 0usize..=50 {
            let tokens: Vec<String> = (0..len).map(|i| format!("t{i}")).collect();
            for min in 1usize..=3 {
                for max in min..=3 {
                    let got = ngrams(&tokens, min, max).terms.len();
                    let want: usize = (min..=max)
                        .map(|n| if len + 1 > n { len + 1 - n } else { 0 })
                        .sum();
                    assert_eq!(got, want, "len={len} range={min}..{max}");
                }
            }
        }
    }

    #[test]
    fn preprocess_applies_all_stages() {
        let p = prep();
        let seq = p.preprocess("prima kind, m chron bronchitis");
        assert_eq!(
            seq.terms,
            vec!["prima", "kind", "moeder", "chron", "bronchitis"]
        );
        assert_eq!(p.preprocess("").terms, Vec::<String>::new());
        assert_eq!(p.preprocess("de het 123 om 12:30").terms, Vec::<String>::new());
    }

    #[test]
    fn preprocess_output_has_no_digits_or_uppercase() {
        let p = prep();
        let seq = p.preprocess("Fors AANGEKOMEN 12x beter; ZH gisteren!! 01-02-2014");
        for term in &seq.terms {
            assert!(term.chars().all(|c| !c.is_ascii_digit()), "digit in {term}");
            assert!(term.chars().all(|c| !c.is_uppercase()), "uppercase in {term}");
        }
    }

    #[test]
    fn preprocess_is_idempotent_on_rule_stable_text() {
        let p = prep();
        let once = p.preprocess("kindje groeit goed, niet ziek geweest");
        let rejoined = once.terms.join(" ");
        let twice = p.preprocess(&rejoined);
        assert_eq!(once, twice);
    }
}
