//! Regex-based terminology normalization and abbreviation discovery.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One ordered replacement rule (pattern;replacement;note).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplacementRule {
    pub pattern: String,
    pub replacement: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ReplacementRule {
    pub fn new(pattern: &str, replacement: &str) -> Self {
        ReplacementRule {
            pattern: pattern.to_string(),
            replacement: replacement.to_string(),
            note: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replacement.chars().any(|c| c.is_ascii_digit()) {
            return Err(Error::Config(format!(
                "replacement '{}' contains digits",
                self.replacement
            )));
        }
        regex::Regex::new(&self.pattern)
            .map_err(|e| Error::Config(format!("pattern '{}': {e}", self.pattern)))?;
        Ok(())
    }

    /// Parse a semicolon-delimited two- or three-column table. Lines that
    /// are empty or start with '#' are skipped.
    pub fn parse_table(text: &str) -> Result<Vec<ReplacementRule>> {
        let mut rules = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.splitn(3, ';');
            let pattern = parts.next().unwrap_or_default().to_string();
            let replacement = match parts.next() {
                Some(r) => r.to_string(),
                None => {
                    return Err(Error::Config(format!(
                        "replacement rule line '{line}' has no ';' separator"
                    )))
                }
            };
            let note = parts.next().map(|s| s.trim().to_string()).filter(|s| !s.is_empty());
            rules.push(ReplacementRule {
                pattern,
                replacement,
                note,
            });
        }
        Ok(rules)
    }
}

/// Compiled rule set. Applying a rule may at most grow the text to the
/// configured budget; a rule whose output would exceed it is skipped for
/// that text and counted. The regex engine itself runs in linear time, so
/// the budget only has to bound replacement-driven growth.
pub struct CompiledRules {
    rules: Vec<(regex::Regex, String)>,
    skipped: AtomicU64,
}

const GROWTH_FACTOR: usize = 4;
const GROWTH_SLACK: usize = 1024;

impl CompiledRules {
    pub fn compile(rules: &[ReplacementRule]) -> Result<Self> {
        let mut compiled = Vec::with_capacity(rules.len());
        for rule in rules {
            rule.validate()?;
            let re = regex::Regex::new(&rule.pattern)
                .map_err(|e| Error::Config(format!("pattern '{}': {e}", rule.pattern)))?;
            compiled.push((re, rule.replacement.clone()));
        }
        Ok(CompiledRules {
            rules: compiled,
            skipped: AtomicU64::new(0),
        })
    }

    /// Apply every rule in order, each globally.
    pub fn apply(&self, text: &str) -> String {
        let budget = text.len() * GROWTH_FACTOR + GROWTH_SLACK;
        let mut current = text.to_string();
        for (re, replacement) in &self.rules {
            let next = re.replace_all(&current, replacement.as_str());
            if next.len() > budget {
                self.skipped.fetch_add(1, Ordering::Relaxed);
                continue;
            }
            if let std::borrow::Cow::Owned(s) = next {
                current = s;
            }
        }
        current
    }

    pub fn skipped(&self) -> u64 {
        self.skipped.load(Ordering::Relaxed)
    }
}

/// A short consonant-only or dotted token that may be an acronym.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AbbreviationCandidate {
    pub candidate: String,
    pub frequency: usize,
    /// A few words of context around one occurrence.
    pub example_context: String,
}

fn is_candidate(token: &str, max_len: usize) -> bool {
    let letters: Vec<char> = token.chars().filter(|c| *c != '.').collect();
    if letters.is_empty() || letters.len() > max_len {
        return false;
    }
    if letters.iter().any(|c| !c.is_alphabetic() || c.is_ascii_digit()) {
        return false;
    }
    let has_dot = token.contains('.');
    let all_consonants = letters
        .iter()
        .all(|c| !matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'è' | 'é' | 'ë'));
    has_dot || all_consonants
}

/// Scan raw texts for abbreviation-like tokens, ranked by descending
/// frequency (ties broken lexicographically), each with one context window.
pub fn extract_abbreviation_candidates<'a, I>(
    texts: I,
    max_len: usize,
) -> Vec<AbbreviationCandidate>
where
    I: IntoIterator<Item = &'a str>,
{
    use std::collections::HashMap;
    let mut counts: HashMap<String, (usize, String)> = HashMap::new();
    for text in texts {
        let words: Vec<&str> = text.split_whitespace().collect();
        for (i, raw) in words.iter().enumerate() {
            let token: String = raw
                .trim_matches(|c: char| !c.is_alphanumeric() && c != '.')
                .trim_matches('.')
                .to_lowercase();
            if token.is_empty() || !is_candidate(&token, max_len) {
                continue;
            }
            let entry = counts.entry(token).or_insert_with(|| {
                let lo = i.saturating_sub(4);
                let hi = (i + 5).min(words.len());
                (0, words[lo..hi].join(" "))
            });
            entry.0 += 1;
        }
    }
    let mut out: Vec<AbbreviationCandidate> = counts
        .into_iter()
        .map(|(candidate, (frequency, example_context))| AbbreviationCandidate {
            candidate,
            frequency,
            example_context,
        })
        .collect();
    out.sort_by(|a, b| {
        b.frequency
            .cmp(&a.frequency)
            .then_with(|| a.candidate.cmp(&b.candidate))
    });
    out
}
