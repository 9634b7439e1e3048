//! Request/response schemas. The predict schema is a whitelist: unknown
//! fields are rejected, and identifier-like keys are refused explicitly
//! so de-identified data stays de-identified.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use signaal_core::corpus::{
    ChildRecord, ConsultNote, FamilyRelation, ObservationValue, Sex, StructuredCategory,
    StructuredObservation,
};

/// Keys that would carry direct identifiers; their presence anywhere in a
/// payload is a contract violation.
pub const FORBIDDEN_KEYS: [&str; 16] = [
    "name",
    "voornaam",
    "achternaam",
    "first_name",
    "last_name",
    "address",
    "adres",
    "street",
    "straat",
    "postcode",
    "zip",
    "bsn",
    "citizen_id",
    "ssn",
    "phone",
    "email",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsultMeta {
    pub location: String,
    #[serde(default = "default_action")]
    pub action_type: String,
    pub observation_date: NaiveDate,
}

fn default_action() -> String {
    "consult".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructuredEntry {
    pub category: String,
    pub value: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationEntry {
    pub relation_type: String,
    pub relative_birth_date: NaiveDate,
}

/// One child file to score: free-text notes plus structured observations
/// and consult metadata. No identifier fields exist in this schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictPayload {
    pub birth_date: NaiveDate,
    #[serde(default)]
    pub sex: Option<String>,
    /// Free-text consult summaries, oldest first.
    #[serde(default)]
    pub socs: Vec<String>,
    /// Consult metadata; when present it must pair 1:1 with `socs`.
    #[serde(default)]
    pub consults: Vec<ConsultMeta>,
    #[serde(default)]
    pub structured: Vec<StructuredEntry>,
    #[serde(default)]
    pub relations: Vec<RelationEntry>,
}

impl PredictPayload {
    pub fn validate(&self) -> Result<(), String> {
        if !self.consults.is_empty() && self.consults.len() != self.socs.len() {
            return Err(format!(
                "consults ({}) must pair 1:1 with socs ({})",
                self.consults.len(),
                self.socs.len()
            ));
        }
        Ok(())
    }

    /// Materialize a (de-identified) child record; the record id is the
    /// prediction id.
    pub fn to_child(&self, record_id: &str) -> ChildRecord {
        let mut child = ChildRecord::new(record_id, self.birth_date);
        child.sex = self
            .sex
            .as_deref()
            .map(Sex::parse)
            .unwrap_or(Sex::Unknown);
        for (i, text) in self.socs.iter().enumerate() {
            let meta = self.consults.get(i);
            child.consults.push(ConsultNote {
                location: meta.map(|m| m.location.clone()).unwrap_or_default(),
                action_type: meta
                    .map(|m| m.action_type.clone())
                    .unwrap_or_else(default_action),
                observation_date: meta
                    .map(|m| m.observation_date)
                    .unwrap_or(self.birth_date),
                text: text.clone(),
            });
        }
        for entry in &self.structured {
            let value = match &entry.value {
                serde_json::Value::Number(n) => {
                    ObservationValue::Number(n.as_f64().unwrap_or(0.0))
                }
                serde_json::Value::String(s) => ObservationValue::parse(s),
                other => ObservationValue::Text(other.to_string()),
            };
            child.structured_observations.push(StructuredObservation::new(
                StructuredCategory::from_token(&entry.category),
                value,
            ));
        }
        for rel in &self.relations {
            child.relations.push(FamilyRelation {
                relation_type: rel.relation_type.clone(),
                relative_birth_date: rel.relative_birth_date,
            });
        }
        child.canonicalize();
        child
    }
}

/// Scan arbitrary JSON for forbidden identifier keys (recursive).
pub fn find_forbidden_key(value: &serde_json::Value) -> Option<String> {
    match value {
        serde_json::Value::Object(map) => {
            for (key, inner) in map {
                let lower = key.to_lowercase();
                if FORBIDDEN_KEYS.iter().any(|f| lower == *f) {
                    return Some(key.clone());
                }
                if let Some(found) = find_forbidden_key(inner) {
                    return Some(found);
                }
            }
            None
        }
        serde_json::Value::Array(items) => items.iter().find_map(find_forbidden_key),
        _ => None,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictResponse {
    pub prediction_id: String,
    pub score: f64,
    pub flagged: bool,
    pub model_version: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackPayload {
    pub prediction_id: String,
    pub confirmed_label: bool,
    #[serde(default)]
    pub note: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forbidden_keys_are_found_recursively() {
        let value: serde_json::Value = serde_json::json!({
            "socs": ["tekst"],
            "structured": [{"category": "x", "value": {"bsn": "123"}}]
        });
        assert_eq!(find_forbidden_key(&value), Some("bsn".to_string()));
        let clean: serde_json::Value = serde_json::json!({"socs": ["tekst"]});
        assert_eq!(find_forbidden_key(&clean), None);
    }

    #[test]
    fn payload_schema_rejects_unknown_fields() {
        let raw = r#"{"birth_date":"2010-01-01","socs":[],"name":"kind"}"#;
        assert!(serde_json::from_str::<PredictPayload>(raw).is_err());
    }

    #[test]
    fn consult_pairing_is_validated() {
        let payload = PredictPayload {
            birth_date: NaiveDate::from_ymd_opt(2010, 1, 1).unwrap(),
            sex: None,
            socs: vec!["a".into(), "b".into()],
            consults: vec![ConsultMeta {
                location: "Noord".into(),
                action_type: "consult".into(),
                observation_date: NaiveDate::from_ymd_opt(2010, 6, 1).unwrap(),
            }],
            structured: vec![],
            relations: vec![],
        };
        assert!(payload.validate().is_err());
    }
}
