//! Ingest the multi-file delimited case layout into a [`Corpus`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Serialize;

use super::{
    BmiMeasurement, ChildRecord, ConsultNote, Corpus, FamilyRelation, ObservationValue, Sex,
    StructuredCategory, StructuredObservation, ZslAction, ZslFinding,
};
use crate::{Error, Result};

/// Standard file names for a corpus directory.
pub const FILE_CONCLUSIONS: &str = "conclusions.csv";
pub const FILE_RELATIONS: &str = "relations.csv";
pub const FILE_BMI: &str = "bmi.csv";
pub const FILE_WORRIES: &str = "worries_zsl.csv";
pub const FILE_FINDINGS: &str = "findings_zsl.csv";
pub const FILE_ACTIONS: &str = "actions_zsl.csv";
pub const FILE_ATTENTION: &str = "attention.csv";
/// Optional corrective relabeling file (person;label).
pub const FILE_LABEL_OVERRIDES: &str = "labels_override.csv";
/// Written by the synthetic generator; never read by the pipeline.
pub const FILE_GROUND_TRUTH: &str = "ground_truth.csv";

#[derive(Debug, Clone)]
pub struct CorpusPaths {
    pub conclusions: PathBuf,
    pub relations: PathBuf,
    pub bmi: PathBuf,
    pub worries: PathBuf,
    pub findings: PathBuf,
    pub actions: PathBuf,
    pub attention: PathBuf,
    pub label_overrides: Option<PathBuf>,
}

impl CorpusPaths {
    pub fn in_dir(dir: &Path) -> CorpusPaths {
        let overrides = dir.join(FILE_LABEL_OVERRIDES);
        CorpusPaths {
            conclusions: dir.join(FILE_CONCLUSIONS),
            relations: dir.join(FILE_RELATIONS),
            bmi: dir.join(FILE_BMI),
            worries: dir.join(FILE_WORRIES),
            findings: dir.join(FILE_FINDINGS),
            actions: dir.join(FILE_ACTIONS),
            attention: dir.join(FILE_ATTENTION),
            label_overrides: overrides.exists().then_some(overrides),
        }
    }
}

/// Row-level anomalies found while ingesting. Rows are kept (repaired when
/// possible) so that label counts stay auditable.
#[derive(Debug, Default, Clone, Serialize)]
pub struct IngestReport {
    pub duplicate_conclusions: usize,
    /// Satellite rows whose person number has no conclusions row; these
    /// create skeleton records.
    pub skeleton_children: usize,
    pub bmi_recomputed: usize,
    pub date_violations: usize,
    pub birth_date_conflicts: usize,
    pub messages: Vec<String>,
}

impl IngestReport {
    fn note(&mut self, message: String) {
        if self.messages.len() < 50 {
            self.messages.push(message);
        }
    }
}

struct Table {
    path: PathBuf,
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn read(path: &Path) -> Result<Table> {
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(b';')
            .flexible(true)
            .from_path(path)
            .map_err(|e| Error::ParseRow {
                file: path.to_path_buf(),
                row: 0,
                message: e.to_string(),
            })?;
        let headers = reader
            .headers()
            .map_err(|e| Error::ParseRow {
                file: path.to_path_buf(),
                row: 0,
                message: e.to_string(),
            })?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::ParseRow {
                file: path.to_path_buf(),
                row: i + 2,
                message: e.to_string(),
            })?;
            rows.push(record.iter().map(str::to_string).collect());
        }
        Ok(Table {
            path: path.to_path_buf(),
            headers,
            rows,
        })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::MissingColumn {
                file: self.path.clone(),
                column: name.to_string(),
            })
    }

    fn value<'a>(&'a self, row: &'a [String], col: usize) -> &'a str {
        row.get(col).map(String::as_str).unwrap_or("")
    }
}

fn parse_date(raw: &str, file: &Path, row: usize) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(raw.trim(), "%Y-%m-%d").map_err(|_| Error::ParseRow {
        file: file.to_path_buf(),
        row,
        message: format!("invalid date '{raw}' (expected YYYY-MM-DD)"),
    })
}

fn parse_float(raw: &str, file: &Path, row: usize, what: &str) -> Result<f64> {
    raw.trim().parse::<f64>().map_err(|_| Error::ParseRow {
        file: file.to_path_buf(),
        row,
        message: format!("invalid {what} '{raw}'"),
    })
}

fn parse_bool(raw: &str) -> bool {
    matches!(raw.trim().to_lowercase().as_str(), "1" | "true" | "ja" | "yes")
}

/// Ingest all files of the layout, joining satellite rows on person number.
pub fn ingest_corpus(paths: &CorpusPaths) -> Result<(Corpus, IngestReport)> {
    let mut report = IngestReport::default();
    let mut children: BTreeMap<String, ChildRecord> = BTreeMap::new();
    let mut birth_dates: HashMap<String, NaiveDate> = HashMap::new();

    // conclusions: defines the primary record set
    let table = Table::read(&paths.conclusions)?;
    let col_person = table.column("Person number")?;
    let col_birth = table.column("Birth date")?;
    let col_location = table.column("JGZ location")?;
    let col_action = table.column("Action type")?;
    let col_obs_date = table.column("Observation date")?;
    let col_text = table.column("Conclusion")?;
    let mut seen: HashSet<(String, NaiveDate, String)> = HashSet::new();
    for (i, row) in table.rows.iter().enumerate() {
        let row_no = i + 2;
        let person = table.value(row, col_person).trim().to_string();
        if person.is_empty() {
            return Err(Error::ParseRow {
                file: table.path.clone(),
                row: row_no,
                message: "empty person number".into(),
            });
        }
        let birth = parse_date(table.value(row, col_birth), &table.path, row_no)?;
        let obs_date = parse_date(table.value(row, col_obs_date), &table.path, row_no)?;
        let action = table.value(row, col_action).trim().to_string();
        if !seen.insert((person.clone(), obs_date, action.clone())) {
            report.duplicate_conclusions += 1;
            report.note(format!(
                "duplicate conclusion for person {person} on {obs_date} ({action}); row dropped"
            ));
            continue;
        }
        let child = children
            .entry(person.clone())
            .or_insert_with(|| ChildRecord::new(&person, birth));
        match birth_dates.entry(person.clone()) {
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(birth);
            }
            std::collections::hash_map::Entry::Occupied(e) => {
                if *e.get() != birth {
                    report.birth_date_conflicts += 1;
                    report.note(format!(
                        "person {person}: conflicting birth date {birth}; keeping {}",
                        e.get()
                    ));
                }
            }
        }
        if obs_date < child.birth_date {
            report.date_violations += 1;
            report.note(format!(
                "person {person}: consult on {obs_date} precedes birth {}",
                child.birth_date
            ));
        }
        child.consults.push(ConsultNote {
            location: table.value(row, col_location).trim().to_string(),
            action_type: action,
            observation_date: obs_date,
            text: table.value(row, col_text).to_string(),
        });
    }

    // Satellite rows for unknown persons create skeleton records.
    let skeleton = |children: &mut BTreeMap<String, ChildRecord>,
                        report: &mut IngestReport,
                        person: &str,
                        birth: NaiveDate| {
        if !children.contains_key(person) {
            report.skeleton_children += 1;
            report.note(format!(
                "person {person} appears only in satellite files; skeleton record created"
            ));
            children.insert(person.to_string(), ChildRecord::new(person, birth));
        }
    };

    // relations
    let table = Table::read(&paths.relations)?;
    let col_person = table.column("Person number")?;
    let col_birth = table.column("Child birth date")?;
    let col_type = table.column("Relation type")?;
    let col_rel_birth = table.column("Relation birth date")?;
    for (i, row) in table.rows.iter().enumerate() {
        let row_no = i + 2;
        let person = table.value(row, col_person).trim().to_string();
        let birth = parse_date(table.value(row, col_birth), &table.path, row_no)?;
        let relation_type = table.value(row, col_type).trim().to_string();
        if relation_type.is_empty() {
            return Err(Error::ParseRow {
                file: table.path.clone(),
                row: row_no,
                message: "empty relation type".into(),
            });
        }
        skeleton(&mut children, &mut report, &person, birth);
        children.get_mut(&person).unwrap().relations.push(FamilyRelation {
            relation_type,
            relative_birth_date: parse_date(
                table.value(row, col_rel_birth),
                &table.path,
                row_no,
            )?,
        });
    }

    // bmi (also carries sex)
    let table = Table::read(&paths.bmi)?;
    let col_person = table.column("Person number")?;
    let col_birth = table.column("Birth date")?;
    let col_sex = table.column("Sex")?;
    let col_length = table.column("Length")?;
    let col_weight = table.column("Weight")?;
    let col_date = table.column("BMI date")?;
    let col_age = table.column("BMI age")?;
    let col_bmi = table.column("BMI")?;
    for (i, row) in table.rows.iter().enumerate() {
        let row_no = i + 2;
        let person = table.value(row, col_person).trim().to_string();
        let birth = parse_date(table.value(row, col_birth), &table.path, row_no)?;
        skeleton(&mut children, &mut report, &person, birth);
        let child = children.get_mut(&person).unwrap();
        if child.sex == Sex::Unknown {
            child.sex = Sex::parse(table.value(row, col_sex));
        }
        let mut measurement = BmiMeasurement {
            date: parse_date(table.value(row, col_date), &table.path, row_no)?,
            age_years: parse_float(table.value(row, col_age), &table.path, row_no, "BMI age")?,
            length_cm: parse_float(table.value(row, col_length), &table.path, row_no, "length")?,
            weight_kg: parse_float(table.value(row, col_weight), &table.path, row_no, "weight")?,
            bmi: parse_float(table.value(row, col_bmi), &table.path, row_no, "BMI")?,
        };
        if !measurement.is_consistent() {
            report.bmi_recomputed += 1;
            report.note(format!(
                "person {person}: BMI {} inconsistent with weight/length; recomputed",
                measurement.bmi
            ));
            measurement.bmi = (measurement.computed_bmi() * 100.0).round() / 100.0;
        }
        child.bmi_series.push(measurement);
    }

    // structured observations
    let table = Table::read(&paths.worries)?;
    let col_person = table.column("Person number")?;
    let col_birth = table.column("Birth date")?;
    let col_obs_type = table.column("Observation type")?;
    let col_value = table.column("Value")?;
    for (i, row) in table.rows.iter().enumerate() {
        let row_no = i + 2;
        let person = table.value(row, col_person).trim().to_string();
        let birth = parse_date(table.value(row, col_birth), &table.path, row_no)?;
        skeleton(&mut children, &mut report, &person, birth);
        let category = StructuredCategory::from_token(table.value(row, col_obs_type).trim());
        let value = ObservationValue::parse(table.value(row, col_value));
        children
            .get_mut(&person)
            .unwrap()
            .structured_observations
            .push(StructuredObservation::new(category, value));
    }

    // findings (the label source)
    let table = Table::read(&paths.findings)?;
    let col_person = table.column("Person number")?;
    let col_birth = table.column("Birth date")?;
    let col_date = table.column("Finding date")?;
    let col_type = table.column("Finding type")?;
    let col_finding = table.column("Finding")?;
    for (i, row) in table.rows.iter().enumerate() {
        let row_no = i + 2;
        let person = table.value(row, col_person).trim().to_string();
        let birth = parse_date(table.value(row, col_birth), &table.path, row_no)?;
        skeleton(&mut children, &mut report, &person, birth);
        let child = children.get_mut(&person).unwrap();
        let finding_date = parse_date(table.value(row, col_date), &table.path, row_no)?;
        if finding_date < child.birth_date {
            report.date_violations += 1;
            report.note(format!(
                "person {person}: finding on {finding_date} precedes birth {}",
                child.birth_date
            ));
        }
        child.zsl_findings.push(ZslFinding {
            finding_date,
            finding_type: table.value(row, col_type).trim().to_string(),
            finding: table.value(row, col_finding).to_string(),
        });
    }

    // care actions
    let table = Table::read(&paths.actions)?;
    let col_person = table.column("Person number")?;
    let col_birth = table.column("Birth date")?;
    let col_location = table.column("JGZ location")?;
    let col_action_type = table.column("Action type")?;
    let col_obs_type = table.column("Observation type")?;
    let col_action = table.column("Action")?;
    for (i, row) in table.rows.iter().enumerate() {
        let row_no = i + 2;
        let person = table.value(row, col_person).trim().to_string();
        let birth = parse_date(table.value(row, col_birth), &table.path, row_no)?;
        skeleton(&mut children, &mut report, &person, birth);
        children.get_mut(&person).unwrap().zsl_actions.push(ZslAction {
            location: table.value(row, col_location).trim().to_string(),
            action_type: table.value(row, col_action_type).trim().to_string(),
            observation_type: table.value(row, col_obs_type).trim().to_string(),
            action: table.value(row, col_action).to_string(),
        });
    }

    // attention flags
    let table = Table::read(&paths.attention)?;
    let col_person = table.column("Person number")?;
    let col_birth = table.column("Birth date")?;
    let col_attention = table.column("Attention")?;
    for (i, row) in table.rows.iter().enumerate() {
        let row_no = i + 2;
        let person = table.value(row, col_person).trim().to_string();
        let birth = parse_date(table.value(row, col_birth), &table.path, row_no)?;
        skeleton(&mut children, &mut report, &person, birth);
        children.get_mut(&person).unwrap().attention =
            parse_bool(table.value(row, col_attention));
    }

    let list: Vec<ChildRecord> = children.into_values().collect();
    Ok((Corpus::new(list), report))
}

/// Read a person;label override table.
pub fn read_label_overrides(path: &Path) -> Result<BTreeMap<String, bool>> {
    let table = Table::read(path)?;
    let col_person = table.column("Person number")?;
    let col_label = table.column("Label")?;
    let mut map = BTreeMap::new();
    for row in &table.rows {
        map.insert(
            table.value(row, col_person).trim().to_string(),
            parse_bool(table.value(row, col_label)),
        );
    }
    Ok(map)
}

/// Read a synthetic ground-truth table (person;true_label).
pub fn read_ground_truth(path: &Path) -> Result<BTreeMap<String, bool>> {
    let table = Table::read(path)?;
    let col_person = table.column("Person number")?;
    let col_label = table.column("True label")?;
    let mut map = BTreeMap::new();
    for row in &table.rows {
        map.insert(
            table.value(row, col_person).trim().to_string(),
            parse_bool(table.value(row, col_label)),
        );
    }
    Ok(map)
}
