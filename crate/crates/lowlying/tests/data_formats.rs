use std::collections::BTreeMap;
use std::path::Path;

use lowlying::data::{parse_csv, parse_json, parse_records, serialize_records, to_csv, to_json, DataFormat};
use lowlying::AppError;
use lowlying_core::maassdata::{normalize_records, validate_records, MaassFormRecord, Parity};
use proptest::prelude::*;

fn record_strategy() -> impl Strategy<Value = (f64, bool, f64, BTreeMap<u64, f64>)> {
    (
        0.5f64..400.0,
        any::<bool>(),
        0.01f64..100.0,
        prop::collection::btree_map(2u64..40, -2.0f64..2.0, 0..12),
    )
}

fn build(raw: Vec<(f64, bool, f64, BTreeMap<u64, f64>)>) -> Vec<MaassFormRecord> {
    let records = raw
        .into_iter()
        .map(|(t, odd, norm_sq, lambdas)| MaassFormRecord {
            t,
            parity: if odd { Parity::Odd } else { Parity::Even },
            lambdas,
            norm_sq,
            source: "generated".into(),
        })
        .collect::<Vec<_>>();
    let mut records = records;
    records.sort_by(|a, b| a.t.total_cmp(&b.t));
    records.dedup_by(|a, b| a.t == b.t);
    records
}

proptest! {
    #[test]
    fn csv_round_trip(raw in prop::collection::vec(record_strategy(), 0..8)) {
        let records = build(raw);
        let back = normalize_records(parse_csv(&to_csv(&records), Path::new("mem.csv")).unwrap()).unwrap();
        prop_assert_eq!(back, records);
    }

    #[test]
    fn json_round_trip(raw in prop::collection::vec(record_strategy(), 0..8)) {
        let records = build(raw);
        let back = normalize_records(parse_json(&to_json(&records).unwrap(), Path::new("mem.json")).unwrap()).unwrap();
        prop_assert_eq!(back, records);
    }

    #[test]
    fn csv_and_json_agree(raw in prop::collection::vec(record_strategy(), 1..6)) {
        let records = build(raw);
        let via_csv = parse_csv(&serialize_records(&records, DataFormat::Csv).unwrap(), Path::new("a.csv")).unwrap();
        let via_json = parse_json(&serialize_records(&records, DataFormat::Json).unwrap(), Path::new("a.json")).unwrap();
        prop_assert_eq!(via_csv, via_json);
    }
}

fn sample() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/sample_forms.csv")
}

#[test]
fn bundled_sample_parses_and_validates() {
    let records = parse_records(&sample(), None).unwrap();
    assert_eq!(records.len(), 3);
    assert_eq!(records[1].parity, Parity::Even);
    assert_eq!(records[0].lambda(6), Some(-0.375));
    assert_eq!(records[2].norm_sq, 1.0);
    assert_eq!(validate_records(&records).failure_count(), 0);
}

#[test]
fn missing_cells_stay_missing() {
    let text = "# normalization: hecke-unit\nt,parity,norm_sq,lambda_2,lambda_3\n9.5,odd,1,,0.25\n";
    let r = parse_csv(text, Path::new("gap.csv")).unwrap();
    assert_eq!(r[0].lambda(2), None);
    assert_eq!(r[0].lambda(3), Some(0.25));
}

#[test]
fn malformed_inputs_name_the_field() {
    let bad_number = "# normalization: hecke-unit\nt,parity,norm_sq\n9.5,odd,one\n";
    match parse_csv(bad_number, Path::new("bad.csv")) {
        Err(AppError::Parse { line, field, .. }) => assert_eq!((line, field.as_str()), (3, "norm_sq")),
        other => panic!("{other:?}"),
    }
    let no_normalization = "t,parity,norm_sq\n9.5,odd,1\n";
    assert!(parse_csv(no_normalization, Path::new("bare.csv")).is_err());
    let wrong_normalization = "# normalization: arithmetic\nt,parity,norm_sq\n9.5,odd,1\n";
    assert!(parse_csv(wrong_normalization, Path::new("arith.csv")).is_err());
    assert!(parse_json("{\"records\": [", Path::new("cut.json")).is_err());
}

#[test]
fn duplicate_forms_are_rejected() {
    let text = "# normalization: hecke-unit\nt,parity,norm_sq\n9.5,odd,1\n9.5,even,1\n";
    let parsed = parse_csv(text, Path::new("dup.csv")).unwrap();
    assert!(normalize_records(parsed).is_err());
}
