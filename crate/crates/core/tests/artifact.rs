mod common;

use std::sync::{Arc, OnceLock};

use tradeoff_core::artifact::{
    read_selections, ModelFamilyArtifact, SelectionLog, SelectionRecord, View,
};
use tradeoff_core::dataset::Attribute;
use tradeoff_core::frontier::{build_family, FamilyConfig, GridConfig};
use tradeoff_core::Error;

fn config() -> FamilyConfig {
    let mut config = FamilyConfig::new(21);
    config.grid = GridConfig { levels: 3, range: 4.0 };
    config
}

fn family() -> &'static ModelFamilyArtifact {
    static FAMILY: OnceLock<ModelFamilyArtifact> = OnceLock::new();
    FAMILY.get_or_init(|| build_family(&common::synthetic_race(200, 21), &config()).unwrap())
}

#[test]
fn export_is_stable_and_round_trips() {
    let data = common::synthetic_race(200, 21);
    let again = build_family(&data, &config()).unwrap();
    let bytes = family().export();
    assert_eq!(bytes, again.export());
    assert!(bytes.ends_with(b"}\n"));

    let loaded = ModelFamilyArtifact::load(&bytes).unwrap();
    assert_eq!(&loaded, family());
    assert_eq!(loaded.export(), bytes);
}

#[test]
fn truncated_artifact_is_a_parse_error() {
    let bytes = family().export();
    let err = ModelFamilyArtifact::load(&bytes[..bytes.len() / 2]).unwrap_err();
    assert!(matches!(err, Error::Parse(_)), "{err}");
}

#[test]
fn unknown_frontier_model_is_an_integrity_error() {
    let mut broken = family().clone();
    broken.frontiers[9].points[0].model_id = "m777".into();
    let err = ModelFamilyArtifact::load(&broken.export()).unwrap_err();
    assert!(matches!(err, Error::Integrity(_)), "{err}");
    assert!(err.to_string().contains("m777"), "{err}");
}

#[test]
fn tampered_counts_are_an_integrity_error() {
    let mut broken = family().clone();
    broken.evaluations[3].group_confusion.a0.tp += 1;
    broken.evaluations[3].group_confusion.a0.fn_ -= 1;
    assert!(matches!(broken.validate(), Err(Error::Integrity(_))));
}

#[test]
fn other_schema_versions_are_rejected() {
    let text = String::from_utf8(family().export()).unwrap();
    let bumped = text.replacen("\"schema_version\": 1", "\"schema_version\": 2", 1);
    let err = ModelFamilyArtifact::load(bumped.as_bytes()).unwrap_err();
    assert!(matches!(err, Error::SchemaVersion { found: 2, expected: 1 }), "{err}");
}

#[test]
fn lookups_follow_the_grid() {
    let a = family();
    assert_eq!(a.attribute(), Attribute::Race);
    assert_eq!(a.threshold_index(0.45), Some(9));
    assert_eq!(a.threshold_index(0.45 + 1e-12), Some(9));
    assert_eq!(a.threshold_index(0.47), None);
    let e = a.evaluation("m002", 0.45).unwrap();
    assert_eq!((e.model_id.as_str(), e.threshold), ("m002", 0.45));
    assert!(a.frontier(Attribute::Gender, 0.45).is_none());
}

fn selection(i: usize) -> SelectionRecord {
    SelectionRecord {
        timestamp: format!("2026-01-01T00:00:{:02}Z", i % 60),
        session_id: format!("session-{i}"),
        attribute: Some(Attribute::Race),
        threshold: 0.45,
        model_id: format!("m00{}", i % 9),
        view: if i.is_multiple_of(2) { View::Matrix } else { View::Text },
        rationale: Some("x".repeat(200 + i)),
    }
}

#[test]
fn concurrent_appends_stay_whole() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("selections.jsonl");
    let log = Arc::new(SelectionLog::open(&path).unwrap());
    let artifact = family();

    let mut sequences: Vec<u64> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..100)
            .map(|i| {
                let log = Arc::clone(&log);
                s.spawn(move || log.append(&selection(i), artifact).unwrap())
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    sequences.sort_unstable();
    assert_eq!(sequences, (1..=100).collect::<Vec<u64>>());

    let mut sessions: Vec<String> = read_selections(&path)
        .unwrap()
        .into_iter()
        .map(|r| r.session_id)
        .collect();
    sessions.sort();
    let mut expected: Vec<String> = (0..100).map(|i| format!("session-{i}")).collect();
    expected.sort();
    assert_eq!(sessions, expected);

    let reopened = SelectionLog::open(&path).unwrap();
    assert_eq!(reopened.len(), 100);
}

#[test]
fn invalid_selection_is_not_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("selections.jsonl");
    let log = SelectionLog::open(&path).unwrap();
    let mut bad = selection(0);
    bad.model_id = "m999".into();
    bad.threshold = 0.47;
    match log.append(&bad, family()) {
        Err(Error::Selection(issues)) => {
            let fields: Vec<_> = issues.iter().map(|i| i.field.as_str()).collect();
            assert_eq!(fields, ["model_id", "threshold"]);
        }
        other => panic!("expected a selection error, got {other:?}"),
    }
    assert!(log.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), b"");
}
