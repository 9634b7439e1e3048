//! Write a [`Corpus`] back to the multi-file delimited layout.
//!
//! Output is byte-stable for a fixed corpus: children are already in
//! canonical person order, per-child rows are written in their stored
//! (sorted) order, and floats use the shortest round-trip formatting.

use std::fmt::Write as _;
use std::path::Path;

use super::ingest::{
    FILE_ACTIONS, FILE_ATTENTION, FILE_BMI, FILE_CONCLUSIONS, FILE_FINDINGS, FILE_RELATIONS,
    FILE_WORRIES,
};
use super::Corpus;
use crate::Result;

fn escape(field: &str) -> String {
    if field.contains(';') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn write_file(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut out = String::with_capacity(rows.len() * 64 + header.len() + 1);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Export the corpus into `dir` using the standard file names.
pub fn export_corpus(corpus: &Corpus, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;

    let mut conclusions = Vec::new();
    let mut relations = Vec::new();
    let mut bmi = Vec::new();
    let mut worries = Vec::new();
    let mut findings = Vec::new();
    let mut actions = Vec::new();
    let mut attention = Vec::new();

    for child in &corpus.children {
        let id = escape(&child.child_id);
        let birth = child.birth_date.format("%Y-%m-%d").to_string();
        for note in &child.consults {
            let mut row = String::new();
            let _ = write!(
                row,
                "{id};{birth};{};{};{};{}",
                escape(&note.location),
                escape(&note.action_type),
                note.observation_date.format("%Y-%m-%d"),
                escape(&note.text)
            );
            conclusions.push(row);
        }
        for rel in &child.relations {
            relations.push(format!(
                "{id};{birth};{};;{}",
                escape(&rel.relation_type),
                rel.relative_birth_date.format("%Y-%m-%d")
            ));
        }
        for m in &child.bmi_series {
            bmi.push(format!(
                "{id};{birth};{};consult;{};{};{};{};{}",
                child.sex.as_str(),
                m.length_cm,
                m.weight_kg,
                m.date.format("%Y-%m-%d"),
                m.age_years,
                m.bmi
            ));
        }
        for obs in &child.structured_observations {
            worries.push(format!(
                "{id};{birth};;observation;{};{}",
                escape(&obs.category.token()),
                escape(&obs.value.render())
            ));
        }
        for f in &child.zsl_findings {
            findings.push(format!(
                "{id};{birth};finding;{};{};{}",
                f.finding_date.format("%Y-%m-%d"),
                escape(&f.finding_type),
                escape(&f.finding)
            ));
        }
        for a in &child.zsl_actions {
            actions.push(format!(
                "{id};{birth};{};{};{};{}",
                escape(&a.location),
                escape(&a.action_type),
                escape(&a.observation_type),
                escape(&a.action)
            ));
        }
        attention.push(format!(
            "{id};{birth};{}",
            if child.attention { "1" } else { "0" }
        ));
    }

    write_file(
        &dir.join(FILE_CONCLUSIONS),
        "Person number;Birth date;JGZ location;Action type;Observation date;Conclusion",
        &conclusions,
    )?;
    write_file(
        &dir.join(FILE_RELATIONS),
        "Person number;Child birth date;Relation type;Relation person number;Relation birth date",
        &relations,
    )?;
    write_file(
        &dir.join(FILE_BMI),
        "Person number;Birth date;Sex;Action type;Length;Weight;BMI date;BMI age;BMI",
        &bmi,
    )?;
    write_file(
        &dir.join(FILE_WORRIES),
        "Person number;Birth date;JGZ location;Action type;Observation type;Value",
        &worries,
    )?;
    write_file(
        &dir.join(FILE_FINDINGS),
        "Person number;Birth date;Action type;Finding date;Finding type;Finding",
        &findings,
    )?;
    write_file(
        &dir.join(FILE_ACTIONS),
        "Person number;Birth date;JGZ location;Action type;Observation type;Action",
        &actions,
    )?;
    write_file(
        &dir.join(FILE_ATTENTION),
        "Person number;Birth date;Attention",
        &attention,
    )?;
    Ok(())
}
