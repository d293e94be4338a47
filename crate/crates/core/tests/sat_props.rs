mod common;

use common::{brute_count, brute_entails, cnf, satisfies};
use proptest::prelude::*;
use roadreq::sat::{count_models, entails, find_redundant, solve, ModelCount, SolveResult};
use roadreq::{Clause, Literal};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn count_matches_enumeration(rs in cnf(1..=14, 30, 4)) {
        prop_assert_eq!(count_models(&rs), ModelCount::from(brute_count(&rs)));
    }

    #[test]
    fn solver_is_sound_and_complete(rs in cnf(1..=12, 40, 3)) {
        match solve(&rs, &[]) {
            SolveResult::Sat(model) => prop_assert!(satisfies(&rs, model.as_slice())),
            SolveResult::Unsat => prop_assert_eq!(brute_count(&rs), 0),
        }
    }

    #[test]
    fn assumptions_are_respected(rs in cnf(2..=10, 20, 3), a in 0usize..10, pos in any::<bool>()) {
        let a = a % rs.num_labels();
        let lit = Literal { label: a, positive: pos };
        let unit = Clause::new([lit]).unwrap();
        let with_unit = rs.with_clause(unit).unwrap();
        match solve(&rs, &[lit]) {
            SolveResult::Sat(model) => {
                prop_assert_eq!(model.get(a), pos);
                prop_assert!(satisfies(&rs, model.as_slice()));
            }
            SolveResult::Unsat => prop_assert_eq!(brute_count(&with_unit), 0),
        }
    }

    #[test]
    fn entailment_matches_truth_table(rs in cnf(1..=10, 20, 3), probe in cnf(10..=10, 1, 3)) {
        if let Some(c) = probe.clauses().first() {
            if c.literals().iter().all(|l| l.label < rs.num_labels()) {
                prop_assert_eq!(entails(&rs, c), brute_entails(&rs, c));
            }
        }
        for (i, c) in rs.clauses().iter().enumerate() {
            prop_assert!(entails(&rs, c));
            prop_assert_eq!(entails(&rs.without(i), c), brute_entails(&rs.without(i), c));
        }
    }

    #[test]
    fn redundancy_matches_truth_table(rs in cnf(1..=8, 12, 3)) {
        let expected: Vec<usize> = (0..rs.len()).filter(|&i| brute_entails(&rs.without(i), &rs.clauses()[i])).collect();
        prop_assert_eq!(find_redundant(&rs), expected);
    }

    #[test]
    fn removing_redundant_clause_keeps_count(rs in cnf(1..=10, 15, 3)) {
        let total = count_models(&rs);
        for i in find_redundant(&rs) {
            prop_assert_eq!(count_models(&rs.without(i)), total.clone());
        }
    }
}

#[test]
fn corpus_count_is_stable_under_clause_order() {
    let rs = roadreq::RequirementSet::road_r();
    let mut clauses = rs.clauses().to_vec();
    clauses.reverse();
    let reversed = roadreq::RequirementSet::new(rs.shared_table(), clauses).unwrap();
    assert_eq!(count_models(&rs), count_models(&reversed));
}
