mod common;

use common::cnf;
use proptest::prelude::*;
use roadreq::requirements::{parse_dimacs, parse_requirements};
use roadreq::RequirementSet;

proptest! {
    #[test]
    fn text_round_trip(rs in cnf(1..=20, 30, 6)) {
        let back = parse_requirements(&rs.to_text(), rs.shared_table()).unwrap();
        prop_assert_eq!(back.clauses(), rs.clauses());
    }

    #[test]
    fn dimacs_round_trip(rs in cnf(1..=20, 30, 6)) {
        let back = parse_dimacs(&rs.to_dimacs(), rs.shared_table()).unwrap();
        prop_assert_eq!(back.clauses(), rs.clauses());
    }
}

#[test]
fn shipped_corpus_round_trips() {
    let rs = RequirementSet::road_r();
    assert_eq!(rs.len(), 243);
    assert_eq!(rs.num_labels(), 41);
    let back = parse_requirements(&rs.to_text(), rs.shared_table()).unwrap();
    assert_eq!(back.clauses(), rs.clauses());
    let back = parse_dimacs(&rs.to_dimacs(), rs.shared_table()).unwrap();
    assert_eq!(back.clauses(), rs.clauses());
}
