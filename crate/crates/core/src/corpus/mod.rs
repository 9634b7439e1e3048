//! Case-file corpus: domain types, ingest/export in the multi-file
//! delimited layout, de-identification, label derivation and statistics.

mod export;
mod ingest;
mod stats;

pub use export::export_corpus;
pub use ingest::{
    ingest_corpus, read_ground_truth, read_label_overrides, CorpusPaths, IngestReport,
    FILE_GROUND_TRUTH, FILE_LABEL_OVERRIDES,
};
pub use stats::{corpus_stats, CorpusStats};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Male,
    Female,
    Unknown,
}

impl Sex {
    pub fn parse(raw: &str) -> Sex {
        match raw.trim().to_lowercase().as_str() {
            "m" | "male" | "man" | "jongen" => Sex::Male,
            "f" | "v" | "female" | "vrouw" | "meisje" => Sex::Female,
            _ => Sex::Unknown,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Sex::Male => "male",
            Sex::Female => "female",
            Sex::Unknown => "unknown",
        }
    }
}

/// One consult's free-text note plus its metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsultNote {
    pub location: String,
    pub action_type: String,
    pub observation_date: NaiveDate,
    /// The free-text summary written at the consult; may be empty.
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZslFinding {
    pub finding_date: NaiveDate,
    pub finding_type: String,
    pub finding: String,
}

/// A registered care action (kept verbatim for layout fidelity).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZslAction {
    pub location: String,
    pub action_type: String,
    pub observation_type: String,
    pub action: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BmiMeasurement {
    pub date: NaiveDate,
    pub age_years: f64,
    pub length_cm: f64,
    pub weight_kg: f64,
    pub bmi: f64,
}

impl BmiMeasurement {
    pub fn computed_bmi(&self) -> f64 {
        self.weight_kg / (self.length_cm / 100.0).powi(2)
    }

    pub fn is_consistent(&self) -> bool {
        (self.bmi - self.computed_bmi()).abs() <= 0.1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyRelation {
    pub relation_type: String,
    pub relative_birth_date: NaiveDate,
}

/// Structured observation categories. The set mirrors the structured data
/// available per child file; unknown registrations round-trip as `Other`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructuredCategory {
    DramaticEvent,
    MothersHealth,
    BurdenVsCarryingFamily,
    BurdenVsCarryingChild,
    BurdenVsCarryingEnvironment,
    BurdenVsCarryingParents,
    DentalCare,
    Overweight,
    GeneralCareReceived,
    GgdCareReceived,
    SamenStartenWeging,
    TriplePContact,
    SkinIssues,
    PermanentCondition,
    GeneralHealth,
    WomensGenitalia,
    MicturitionDefecation,
    MotherAgeAtBirth,
    BirthCountryChild,
    BirthCountryMother,
    BirthCountryFather,
    #[serde(untagged)]
    Other(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationKind {
    Categorical,
    Count,
    CountWithFindings,
    Numeric,
}

impl StructuredCategory {
    /// Every category except `Other`, in the fixed feature-column order.
    pub fn known() -> &'static [StructuredCategory] {
        use StructuredCategory::*;
        static KNOWN: std::sync::OnceLock<Vec<StructuredCategory>> = std::sync::OnceLock::new();
        KNOWN.get_or_init(|| {
            vec![
                DramaticEvent,
                MothersHealth,
                BurdenVsCarryingFamily,
                BurdenVsCarryingChild,
                BurdenVsCarryingEnvironment,
                BurdenVsCarryingParents,
                DentalCare,
                Overweight,
                GeneralCareReceived,
                GgdCareReceived,
                SamenStartenWeging,
                TriplePContact,
                SkinIssues,
                PermanentCondition,
                GeneralHealth,
                WomensGenitalia,
                MicturitionDefecation,
                MotherAgeAtBirth,
                BirthCountryChild,
                BirthCountryMother,
                BirthCountryFather,
            ]
        })
    }

    pub fn kind(&self) -> ObservationKind {
        use StructuredCategory::*;
        match self {
            MotherAgeAtBirth => ObservationKind::Numeric,
            BirthCountryChild | BirthCountryMother | BirthCountryFather => {
                ObservationKind::Categorical
            }
            GeneralCareReceived | GgdCareReceived | TriplePContact => ObservationKind::Count,
            Other(_) => ObservationKind::Categorical,
            _ => ObservationKind::CountWithFindings,
        }
    }

    pub fn token(&self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default()
    }

    pub fn from_token(token: &str) -> StructuredCategory {
        serde_json::from_value(serde_json::Value::String(token.to_string()))
            .unwrap_or_else(|_| StructuredCategory::Other(token.to_string()))
    }
}

/// Value of a structured observation: free text or a number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservationValue {
    Number(f64),
    Text(String),
}

impl ObservationValue {
    pub fn parse(raw: &str) -> ObservationValue {
        let t = raw.trim();
        match t.parse::<f64>() {
            Ok(n) if t.chars().next().map_or(false, |c| c.is_ascii_digit() || c == '-') => {
                ObservationValue::Number(n)
            }
            _ => ObservationValue::Text(t.to_string()),
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            ObservationValue::Number(n) => Some(*n),
            ObservationValue::Text(t) => t.parse().ok(),
        }
    }

    pub fn render(&self) -> String {
        match self {
            ObservationValue::Number(n) => format!("{n}"),
            ObservationValue::Text(t) => t.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredObservation {
    pub category: StructuredCategory,
    pub kind: ObservationKind,
    pub value: ObservationValue,
}

impl StructuredObservation {
    pub fn new(category: StructuredCategory, value: ObservationValue) -> Self {
        let kind = match (&category, &value) {
            (StructuredCategory::Other(_), ObservationValue::Number(_)) => {
                ObservationKind::Numeric
            }
            (c, _) => c.kind(),
        };
        StructuredObservation {
            category,
            kind,
            value,
        }
    }
}

/// One child's full file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChildRecord {
    pub child_id: String,
    pub birth_date: NaiveDate,
    pub sex: Sex,
    /// Ordered by observation date ascending.
    pub consults: Vec<ConsultNote>,
    pub bmi_series: Vec<BmiMeasurement>,
    pub relations: Vec<FamilyRelation>,
    pub zsl_findings: Vec<ZslFinding>,
    pub zsl_actions: Vec<ZslAction>,
    pub attention: bool,
    pub structured_observations: Vec<StructuredObservation>,
}

impl ChildRecord {
    pub fn new(child_id: &str, birth_date: NaiveDate) -> Self {
        ChildRecord {
            child_id: child_id.to_string(),
            birth_date,
            sex: Sex::Unknown,
            consults: Vec::new(),
            bmi_series: Vec::new(),
            relations: Vec::new(),
            zsl_findings: Vec::new(),
            zsl_actions: Vec::new(),
            attention: false,
            structured_observations: Vec::new(),
        }
    }

    /// Age in years at `date`.
    pub fn age_at(&self, date: NaiveDate) -> f64 {
        (date - self.birth_date).num_days() as f64 / 365.25
    }

    /// Sort consults, measurements and findings into their canonical order.
    pub fn canonicalize(&mut self) {
        self.consults.sort_by(|a, b| {
            (a.observation_date, &a.action_type).cmp(&(b.observation_date, &b.action_type))
        });
        self.bmi_series.sort_by(|a, b| {
            a.date.cmp(&b.date).then_with(|| {
                a.age_years
                    .partial_cmp(&b.age_years)
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        });
        self.zsl_findings.sort_by(|a, b| {
            (a.finding_date, &a.finding_type, &a.finding).cmp(&(
                b.finding_date,
                &b.finding_type,
                &b.finding,
            ))
        });
    }

    /// All consult texts concatenated in date order.
    pub fn concatenated_text(&self) -> String {
        let mut joined = String::new();
        for consult in &self.consults {
            if !joined.is_empty() {
                joined.push(' ');
            }
            joined.push_str(&consult.text);
        }
        joined
    }
}

/// The positive label: a presumed-abuse registration exists.
pub fn derive_label(child: &ChildRecord) -> bool {
    !child.zsl_findings.is_empty()
}

/// Replace the child id with a keyed one-way digest. The same id and salt
/// always map to the same token, so the data owner can re-link results.
pub fn deidentify(record: &ChildRecord, salt: &str) -> ChildRecord {
    assert!(!salt.is_empty(), "de-identification salt must be non-empty");
    let mut out = record.clone();
    out.child_id = pseudonym(&record.child_id, salt);
    out
}

/// Keyed pseudonymous token for an identifier.
pub fn pseudonym(id: &str, salt: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(salt.as_bytes());
    hasher.update([0x1f]);
    hasher.update(id.as_bytes());
    let digest = hasher.finalize();
    hex::encode(&digest[..16])
}

/// An immutable, shareable corpus of child records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub children: Vec<ChildRecord>,
}

impl Corpus {
    /// Canonicalize ordering: children by person key, consults by date,
    /// measurements and findings likewise.
    pub fn new(mut children: Vec<ChildRecord>) -> Corpus {
        for child in &mut children {
            child.canonicalize();
        }
        children.sort_by(|a, b| person_sort_key(&a.child_id).cmp(&person_sort_key(&b.child_id)));
        Corpus { children }
    }

    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        self.children.is_empty()
    }

    /// Derived labels, optionally forced by an override map.
    pub fn labels(&self, overrides: Option<&BTreeMap<String, bool>>) -> Vec<bool> {
        self.children
            .iter()
            .map(|c| match overrides.and_then(|m| m.get(&c.child_id)) {
                Some(forced) => *forced,
                None => derive_label(c),
            })
            .collect()
    }

    /// Distinct consult locations, sorted.
    pub fn locations(&self) -> Vec<String> {
        let mut set: Vec<String> = self
            .children
            .iter()
            .flat_map(|c| c.consults.iter().map(|n| n.location.clone()))
            .collect();
        set.sort();
        set.dedup();
        set
    }

    pub fn deidentify(&self, salt: &str) -> Corpus {
        Corpus::new(self.children.iter().map(|c| deidentify(c, salt)).collect())
    }
}

/// Sort key for person identifiers: numeric ids in numeric order, then
/// everything else lexicographically.
pub(crate) fn person_sort_key(id: &str) -> (u8, u64, String) {
    match id.parse::<u64>() {
        Ok(n) => (0, n, String::new()),
        Err(_) => (1, 0, id.to_string()),
    }
}
