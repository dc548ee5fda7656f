//! The JSONL copies under `fixtures/` must match the programmatic fixtures.
//! Regenerate with `QALIGN_BLESS=1 cargo test --test fixture_files`.

use std::path::PathBuf;

use qalign_core::fixtures;
use qalign_core::jsonl::{read_jsonl_file, to_jsonl_string};
use qalign_core::{AlignmentSet, SentencePairInstance};

fn check(name: &str, expected: String) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    if std::env::var_os("QALIGN_BLESS").is_some() {
        std::fs::write(&path, &expected).unwrap();
    }
    let on_disk = std::fs::read_to_string(&path).unwrap_or_default();
    assert_eq!(on_disk, expected, "{} is stale", path.display());
}

#[test]
fn fixture_files_are_current() {
    let (pairs, gold): (Vec<_>, Vec<_>) = fixtures::gold_pairs().into_iter().unzip();
    check("pairs.jsonl", to_jsonl_string(&pairs).unwrap());
    check("gold.jsonl", to_jsonl_string(&gold).unwrap());
    check("coref.jsonl", to_jsonl_string(&fixtures::coref_annotations()).unwrap());
    check("fusion.jsonl", to_jsonl_string(&[fixtures::police_dogs_instance()]).unwrap());
    check("fusion_outputs.jsonl", to_jsonl_string(&fixtures::police_dogs_outputs()).unwrap());
}

#[test]
fn fixture_files_parse_back() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let pairs: Vec<SentencePairInstance> = read_jsonl_file(dir.join("pairs.jsonl")).unwrap();
    let gold: Vec<AlignmentSet> = read_jsonl_file(dir.join("gold.jsonl")).unwrap();
    let expected = fixtures::gold_pairs();
    assert_eq!(pairs.len(), expected.len());
    for ((p, g), (ep, eg)) in pairs.iter().zip(&gold).zip(&expected) {
        assert_eq!(p, ep);
        assert_eq!(g, eg);
    }
}
