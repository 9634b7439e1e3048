//! Hand-constructed file fixtures for the ingest contract: join by person
//! number, row repair, dedup, skeleton records and schema errors.

use signaal_core::corpus::{corpus_stats, ingest_corpus, CorpusPaths, Sex};
use signaal_core::Error;

fn write(dir: &std::path::Path, name: &str, content: &str) {
    std::fs::write(dir.join(name), content).unwrap();
}

fn empty_layout(dir: &std::path::Path) {
    write(
        dir,
        "conclusions.csv",
        "Person number;Birth date;JGZ location;Action type;Observation date;Conclusion\n",
    );
    write(
        dir,
        "relations.csv",
        "Person number;Child birth date;Relation type;Relation person number;Relation birth date\n",
    );
    write(
        dir,
        "bmi.csv",
        "Person number;Birth date;Sex;Action type;Length;Weight;BMI date;BMI age;BMI\n",
    );
    write(
        dir,
        "worries_zsl.csv",
        "Person number;Birth date;JGZ location;Action type;Observation type;Value\n",
    );
    write(
        dir,
        "findings_zsl.csv",
        "Person number;Birth date;Action type;Finding date;Finding type;Finding\n",
    );
    write(
        dir,
        "actions_zsl.csv",
        "Person number;Birth date;JGZ location;Action type;Observation type;Action\n",
    );
    write(dir, "attention.csv", "Person number;Birth date;Attention\n");
}

#[test]
fn empty_files_yield_an_empty_corpus() {
    let dir = tempfile::tempdir().unwrap();
    empty_layout(dir.path());
    let (corpus, report) = ingest_corpus(&CorpusPaths::in_dir(dir.path())).unwrap();
    assert_eq!(corpus.len(), 0);
    assert_eq!(report.skeleton_children, 0);
    let stats = corpus_stats(&corpus, 100, 1);
    assert_eq!(stats.n_children, 0);
}

#[test]
fn three_children_join_by_hand() {
    let dir = tempfile::tempdir().unwrap();
    empty_layout(dir.path());
    write(
        dir.path(),
        "conclusions.csv",
        "Person number;Birth date;JGZ location;Action type;Observation date;Conclusion\n\
         1;2010-01-10;Noord;consult;2010-02-10;eerste controle\n\
         1;2010-01-10;Noord;consult;2010-05-10;groeit goed\n\
         2;2010-03-05;Zuid;consult;2010-04-05;prima kind\n\
         2;2010-03-05;Zuid;huisbezoek;2010-08-05;thuis bezocht\n\
         3;2010-06-01;Oost;consult;2010-07-01;alles in orde\n\
         3;2010-06-01;Oost;consult;2011-06-01;jaarcontrole\n",
    );
    write(
        dir.path(),
        "relations.csv",
        "Person number;Child birth date;Relation type;Relation person number;Relation birth date\n\
         1;2010-01-10;moeder;;1985-05-01\n\
         2;2010-03-05;moeder;;1990-02-02\n\
         2;2010-03-05;broer;;2008-01-01\n",
    );
    write(
        dir.path(),
        "bmi.csv",
        "Person number;Birth date;Sex;Action type;Length;Weight;BMI date;BMI age;BMI\n\
         1;2010-01-10;male;consult;55;4.5;2010-02-10;0.08;14.88\n\
         2;2010-03-05;female;consult;60;5.4;2010-04-05;0.08;15\n",
    );
    write(
        dir.path(),
        "findings_zsl.csv",
        "Person number;Birth date;Action type;Finding date;Finding type;Finding\n\
         2;2010-03-05;finding;2011-01-01;zorgmelding;zorg over thuissituatie\n",
    );
    write(
        dir.path(),
        "attention.csv",
        "Person number;Birth date;Attention\n1;2010-01-10;0\n2;2010-03-05;1\n3;2010-06-01;0\n",
    );

    let (corpus, report) = ingest_corpus(&CorpusPaths::in_dir(dir.path())).unwrap();
    assert_eq!(corpus.len(), 3);
    let total_consults: usize = corpus.children.iter().map(|c| c.consults.len()).sum();
    assert_eq!(total_consults, 6);
    assert_eq!(report.skeleton_children, 0);

    let child1 = &corpus.children[0];
    assert_eq!(child1.child_id, "1");
    assert_eq!(child1.sex, Sex::Male);
    assert_eq!(child1.consults.len(), 2);
    assert_eq!(child1.consults[0].text, "eerste controle");
    assert_eq!(child1.relations.len(), 1);
    assert!(!child1.attention);
    assert!(child1.zsl_findings.is_empty());

    let child2 = &corpus.children[1];
    assert_eq!(child2.sex, Sex::Female);
    assert_eq!(child2.relations.len(), 2);
    assert!(child2.attention);
    assert_eq!(child2.zsl_findings.len(), 1);

    let child3 = &corpus.children[2];
    assert_eq!(child3.sex, Sex::Unknown); // no BMI row carries the sex
    assert_eq!(child3.consults[1].text, "jaarcontrole");
}

#[test]
fn inconsistent_bmi_is_recomputed_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    empty_layout(dir.path());
    write(
        dir.path(),
        "conclusions.csv",
        "Person number;Birth date;JGZ location;Action type;Observation date;Conclusion\n\
         1;2010-01-10;Noord;consult;2010-02-10;x\n",
    );
    // weight 4.5 at length 55cm: true bmi = 4.5 / 0.55^2 = 14.876...
    write(
        dir.path(),
        "bmi.csv",
        "Person number;Birth date;Sex;Action type;Length;Weight;BMI date;BMI age;BMI\n\
         1;2010-01-10;male;consult;55;4.5;2010-02-10;0.08;22.0\n",
    );
    let (corpus, report) = ingest_corpus(&CorpusPaths::in_dir(dir.path())).unwrap();
    assert_eq!(report.bmi_recomputed, 1);
    let measurement = &corpus.children[0].bmi_series[0];
    let expected = 4.5 / (0.55_f64 * 0.55);
    assert!((measurement.bmi - expected).abs() <= 0.1, "bmi {}", measurement.bmi);
    assert!(measurement.is_consistent());
}

#[test]
fn duplicate_conclusions_are_dropped_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    empty_layout(dir.path());
    write(
        dir.path(),
        "conclusions.csv",
        "Person number;Birth date;JGZ location;Action type;Observation date;Conclusion\n\
         1;2010-01-10;Noord;consult;2010-02-10;eerste\n\
         1;2010-01-10;Noord;consult;2010-02-10;dubbel\n",
    );
    let (corpus, report) = ingest_corpus(&CorpusPaths::in_dir(dir.path())).unwrap();
    assert_eq!(report.duplicate_conclusions, 1);
    assert_eq!(corpus.children[0].consults.len(), 1);
    assert_eq!(corpus.children[0].consults[0].text, "eerste");
}

#[test]
fn satellite_only_person_becomes_a_skeleton_record() {
    let dir = tempfile::tempdir().unwrap();
    empty_layout(dir.path());
    write(
        dir.path(),
        "findings_zsl.csv",
        "Person number;Birth date;Action type;Finding date;Finding type;Finding\n\
         9;2010-05-05;finding;2012-01-01;zorgmelding;melding\n",
    );
    let (corpus, report) = ingest_corpus(&CorpusPaths::in_dir(dir.path())).unwrap();
    assert_eq!(report.skeleton_children, 1);
    assert_eq!(corpus.len(), 1);
    assert_eq!(corpus.children[0].child_id, "9");
    assert!(corpus.children[0].consults.is_empty());
    // the skeleton keeps the label auditable
    assert_eq!(corpus.labels(None), vec![true]);
}

#[test]
fn missing_column_names_file_and_column() {
    let dir = tempfile::tempdir().unwrap();
    empty_layout(dir.path());
    write(
        dir.path(),
        "conclusions.csv",
        "Person number;Birth date;JGZ location;Action type;Conclusion\n",
    );
    let err = ingest_corpus(&CorpusPaths::in_dir(dir.path())).unwrap_err();
    match err {
        Error::MissingColumn { file, column } => {
            assert!(file.ends_with("conclusions.csv"));
            assert_eq!(column, "Observation date");
        }
        other => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn consult_before_birth_is_kept_but_counted() {
    let dir = tempfile::tempdir().unwrap();
    empty_layout(dir.path());
    write(
        dir.path(),
        "conclusions.csv",
        "Person number;Birth date;JGZ location;Action type;Observation date;Conclusion\n\
         1;2010-06-10;Noord;consult;2010-02-10;te vroeg geregistreerd\n",
    );
    let (corpus, report) = ingest_corpus(&CorpusPaths::in_dir(dir.path())).unwrap();
    assert_eq!(report.date_violations, 1);
    assert_eq!(corpus.children[0].consults.len(), 1);
}
