//! Summarizing (meta) features and structured-data features.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{ChildRecord, ObservationKind, Sex, StructuredCategory};
use crate::textprep;

/// Age interval edges in years: [0-1), [1-2), [2-3), [3-4).
pub const AGE_INTERVALS: [(f64, f64); 4] = [(0.0, 1.0), (1.0, 2.0), (2.0, 3.0), (3.0, 4.0)];

/// Raw per-child summarizing features; categorical parts are expanded
/// against fitted dictionaries at assembly time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaFeatureSet {
    pub avg_chars_per_consult: f64,
    /// Consult counts per age interval [0-1,1-2,2-3,3-4).
    pub consults_per_interval: [usize; 4],
    /// Distinct / total tokens over the child's own consults.
    pub lexical_diversity: f64,
    /// Ties broken lexicographically; "NONE" without consults.
    pub most_visited_location: String,
    pub relation_counts: BTreeMap<String, usize>,
    pub sex: Sex,
}

/// Summarizing features for one child.
pub fn meta_features(child: &ChildRecord, stopwords: &BTreeSet<String>) -> MetaFeatureSet {
    let n = child.consults.len();
    let avg_chars = if n == 0 {
        0.0
    } else {
        child
            .consults
            .iter()
            .map(|c| c.text.chars().count())
            .sum::<usize>() as f64
            / n as f64
    };

    let mut intervals = [0usize; 4];
    for consult in &child.consults {
        let age = child.age_at(consult.observation_date);
        for (i, (lo, hi)) in AGE_INTERVALS.iter().enumerate() {
            if age >= *lo && age < *hi {
                intervals[i] += 1;
                break;
            }
        }
    }

    let mut total_tokens = 0usize;
    let mut distinct = std::collections::HashSet::new();
    for consult in &child.consults {
        for token in textprep::tokenize(&consult.text) {
            if stopwords.contains(&token) {
                continue;
            }
            total_tokens += 1;
            distinct.insert(token);
        }
    }
    let lexical_diversity = if total_tokens == 0 {
        0.0
    } else {
        distinct.len() as f64 / total_tokens as f64
    };

    let mut visits: BTreeMap<&str, usize> = BTreeMap::new();
    for consult in &child.consults {
        *visits.entry(consult.location.as_str()).or_insert(0) += 1;
    }
    let most_visited = visits
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
        .map(|(loc, _)| loc.to_string())
        .unwrap_or_else(|| "NONE".to_string());

    let mut relation_counts = BTreeMap::new();
    for rel in &child.relations {
        *relation_counts.entry(rel.relation_type.clone()).or_insert(0) += 1;
    }

    MetaFeatureSet {
        avg_chars_per_consult: avg_chars,
        consults_per_interval: intervals,
        lexical_diversity,
        most_visited_location: most_visited,
        relation_counts,
        sex: child.sex,
    }
}

/// Dictionaries for expanding categorical meta features, fitted on
/// training children and frozen afterwards.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetaDictionary {
    pub locations: Vec<String>,
    pub relation_types: Vec<String>,
}

impl MetaDictionary {
    pub fn fit(children: &[&ChildRecord], stopwords: &BTreeSet<String>) -> MetaDictionary {
        let mut locations = BTreeSet::new();
        let mut relation_types = BTreeSet::new();
        for child in children {
            let meta = meta_features(child, stopwords);
            locations.insert(meta.most_visited_location);
            for rel_type in meta.relation_counts.keys() {
                relation_types.insert(rel_type.clone());
            }
        }
        MetaDictionary {
            locations: locations.into_iter().collect(),
            relation_types: relation_types.into_iter().collect(),
        }
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut names = vec![
            "meta:avg_chars_per_consult".to_string(),
            "meta:consults_0_1".to_string(),
            "meta:consults_1_2".to_string(),
            "meta:consults_2_3".to_string(),
            "meta:consults_3_4".to_string(),
            "meta:lexical_diversity".to_string(),
        ];
        for loc in &self.locations {
            names.push(format!("meta:location={loc}"));
        }
        for rel in &self.relation_types {
            names.push(format!("meta:relations:{rel}"));
        }
        names.push("meta:sex=male".to_string());
        names.push("meta:sex=female".to_string());
        names.push("meta:sex=unknown".to_string());
        names
    }

    /// Dense expansion matching `column_names`. Unknown locations and
    /// relation types map to all-zero slots (open world).
    pub fn expand(&self, meta: &MetaFeatureSet) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.column_names().len());
        out.push(meta.avg_chars_per_consult);
        for count in meta.consults_per_interval {
            out.push(count as f64);
        }
        out.push(meta.lexical_diversity);
        for loc in &self.locations {
            out.push(if *loc == meta.most_visited_location {
                1.0
            } else {
                0.0
            });
        }
        for rel in &self.relation_types {
            out.push(meta.relation_counts.get(rel).copied().unwrap_or(0) as f64);
        }
        out.push(if meta.sex == Sex::Male { 1.0 } else { 0.0 });
        out.push(if meta.sex == Sex::Female { 1.0 } else { 0.0 });
        out.push(if meta.sex == Sex::Unknown { 1.0 } else { 0.0 });
        out
    }
}

/// Value dictionaries for categorical structured observations plus the
/// roster of `Other` categories seen in training.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StructuredDictionary {
    /// category token -> sorted observed values (categorical categories).
    pub categorical_values: BTreeMap<String, Vec<String>>,
    /// Other categories seen in training, with their inferred kind.
    pub other_categories: Vec<(String, ObservationKind)>,
}

impl StructuredDictionary {
    pub fn fit(children: &[&ChildRecord]) -> StructuredDictionary {
        let mut categorical: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut others: BTreeMap<String, ObservationKind> = BTreeMap::new();
        for child in children {
            for obs in &child.structured_observations {
                match (&obs.category, obs.kind) {
                    (StructuredCategory::Other(name), kind) => {
                        others.entry(name.clone()).or_insert(kind);
                        if kind == ObservationKind::Categorical {
                            categorical
                                .entry(name.clone())
                                .or_default()
                                .insert(obs.value.render());
                        }
                    }
                    (cat, ObservationKind::Categorical) => {
                        categorical
                            .entry(cat.token())
                            .or_default()
                            .insert(obs.value.render());
                    }
                    _ => {}
                }
            }
        }
        StructuredDictionary {
            categorical_values: categorical
                .into_iter()
                .map(|(k, v)| (k, v.into_iter().collect()))
                .collect(),
            other_categories: others.into_iter().collect(),
        }
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for cat in StructuredCategory::known() {
            let token = cat.token();
            match cat.kind() {
                ObservationKind::Categorical => {
                    for value in self.categorical_values.get(&token).into_iter().flatten() {
                        names.push(format!("struct:{token}={value}"));
                    }
                }
                _ => names.push(format!("struct:{token}")),
            }
        }
        for (name, kind) in &self.other_categories {
            match kind {
                ObservationKind::Categorical => {
                    for value in self.categorical_values.get(name).into_iter().flatten() {
                        names.push(format!("struct:{name}={value}"));
                    }
                }
                _ => names.push(format!("struct:{name}")),
            }
        }
        names
    }
}

/// Dense structured feature vector for one child, matching
/// `dict.column_names()`. Count categories count observation rows; numeric
/// categories pass the first value through; categorical categories one-hot
/// against the training dictionary, with unknown values all-zero.
pub fn structured_features(child: &ChildRecord, dict: &StructuredDictionary) -> Vec<f64> {
    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    let mut numerics: BTreeMap<String, f64> = BTreeMap::new();
    let mut categoricals: BTreeMap<String, String> = BTreeMap::new();
    for obs in &child.structured_observations {
        let token = obs.category.token();
        match obs.kind {
            ObservationKind::Count | ObservationKind::CountWithFindings => {
                *counts.entry(token).or_insert(0.0) += 1.0;
            }
            ObservationKind::Numeric => {
                numerics
                    .entry(token)
                    .or_insert_with(|| obs.value.as_number().unwrap_or(0.0));
            }
            ObservationKind::Categorical => {
                categoricals.entry(token).or_insert_with(|| obs.value.render());
            }
        }
    }

    let mut out = Vec::new();
    let push_category = |token: &str, kind: ObservationKind, out: &mut Vec<f64>| match kind {
        ObservationKind::Categorical => {
            let observed = categoricals.get(token);
            for value in dict.categorical_values.get(token).into_iter().flatten() {
                out.push(if Some(value) == observed { 1.0 } else { 0.0 });
            }
        }
        ObservationKind::Numeric => {
            out.push(numerics.get(token).copied().unwrap_or(0.0));
        }
        _ => {
            out.push(counts.get(token).copied().unwrap_or(0.0));
        }
    };

    for cat in StructuredCategory::known() {
        push_category(&cat.token(), cat.kind(), &mut out);
    }
    for (name, kind) in &dict.other_categories {
        push_category(name, *kind, &mut out);
    }
    out
}
