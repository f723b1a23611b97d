//! Checks against the bundled two-year recidivism table.

mod common;

use tradeoff_core::dataset::{
    build_balanced, encode, filter_records, parse_raw, split, Attribute, DefendantRecord, Group,
};

fn records() -> Vec<DefendantRecord> {
    let bytes = std::fs::read(common::data_path()).expect("bundled dataset");
    let parsed = parse_raw(&bytes).unwrap();
    assert_eq!(parsed.records.len(), 7214);
    assert!(parsed.rejects.is_empty());
    let (records, report) = filter_records(&parsed.records);
    assert_eq!(report.input, 7214);
    assert_eq!(report.kept, records.len());
    records
}

#[test]
fn filtering_keeps_the_two_race_groups() {
    let records = records();
    assert_eq!(records.len(), 6150);
    let aa = records
        .iter()
        .filter(|r| Attribute::Race.group_of(r) == Group::A1)
        .count();
    assert_eq!(aa, 3696);
    let female = records
        .iter()
        .filter(|r| Attribute::Gender.group_of(r) == Group::A1)
        .count();
    assert_eq!(female, 1219);
}

#[test]
fn default_balanced_datasets_and_splits() {
    let records = records();
    let race = build_balanced(&records, Attribute::Race, 1500, 42).unwrap();
    assert_eq!(race.len(), 3000);
    let gender = build_balanced(&records, Attribute::Gender, 800, 42).unwrap();
    assert_eq!(gender.len(), 1600);

    let parts = split(&race, 0.7, 42).unwrap();
    assert_eq!((parts.train.len(), parts.test.len()), (2100, 900));
    let matrix = encode(&race, &parts.train).unwrap();
    assert_eq!(matrix.dim(), 9);
    assert!(matrix.warnings.is_empty(), "{:?}", matrix.warnings);

    let gender_matrix = encode(&gender, &split(&gender, 0.7, 42).unwrap().train).unwrap();
    assert_eq!(gender_matrix.dim(), 7);
    assert!(!gender_matrix.normalization.feature_names.iter().any(|n| n.starts_with("sex")));
}

#[test]
fn oversized_request_names_the_group() {
    let err = build_balanced(&records(), Attribute::Gender, 1500, 42).unwrap_err();
    assert!(err.to_string().contains("female"), "{err}");
}
