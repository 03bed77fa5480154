mod common;

use proptest::prelude::*;
use tmkit::dsl::{parse_str, print};

#[test]
fn corpus_files_round_trip_through_the_printer() {
    for path in common::corpus() {
        let text = std::fs::read_to_string(&path).unwrap();
        let doc = parse_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let printed = print(&doc);
        let reparsed = parse_str(&printed).unwrap_or_else(|e| panic!("{} reprint: {e}\n{printed}", path.display()));
        assert_eq!(reparsed, doc.canonical(), "{}", path.display());
        assert_eq!(print(&reparsed), printed, "{} fmt is not idempotent", path.display());
    }
}

#[test]
fn canonical_form_is_a_fixed_point() {
    for path in common::corpus() {
        let doc = parse_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(doc.canonical().canonical(), doc.canonical(), "{}", path.display());
    }
}

#[test]
fn beef_matches_its_golden_text() {
    let doc = parse_str(&common::read_fixture("beef.tm")).unwrap();
    assert_eq!(print(&doc), common::read_fixture("golden/beef.tm"));
}

#[test]
fn empty_document() {
    let doc = parse_str("").unwrap();
    assert!(doc.model.is_empty());
    assert_eq!(parse_str(&print(&doc)).unwrap(), doc.canonical());
}

#[test]
fn comments_and_layout_do_not_matter() {
    let a = parse_str("thimac A { create; release; } flow A.create -> A.release;").unwrap();
    let b = parse_str("# a comment\nthimac A {\n  create;\n  release;\n}\n\nflow A.create\n  -> A.release;\n").unwrap();
    assert_eq!(print(&a), print(&b));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn generated_programs_round_trip(spec in common::gen::program_spec()) {
        let text = spec.render();
        let doc = parse_str(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        let printed = print(&doc);
        let reparsed = parse_str(&printed).unwrap();
        prop_assert_eq!(&reparsed, &doc.canonical());
        prop_assert_eq!(print(&reparsed), printed);
    }
}
