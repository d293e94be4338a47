#![allow(dead_code)]

use proptest::prelude::*;
use roadreq::{Clause, LabelTable, Literal, RequirementSet};

/// Random CNF over `n` labels: up to `max_clauses` clauses of 1..=`max_len`
/// distinct labels with random polarity.
pub fn cnf(n_range: std::ops::RangeInclusive<usize>, max_clauses: usize, max_len: usize) -> impl Strategy<Value = RequirementSet> {
    n_range.prop_flat_map(move |n| {
        let clause = proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 1..=max_len.min(n))
            .prop_flat_map(|labels| {
                let k = labels.len();
                (Just(labels), proptest::collection::vec(any::<bool>(), k))
            })
            .prop_map(|(labels, pols)| {
                Clause::new(labels.into_iter().zip(pols).map(|(label, positive)| Literal { label, positive })).unwrap()
            });
        proptest::collection::vec(clause, 0..=max_clauses)
            .prop_map(move |clauses| RequirementSet::new(LabelTable::synthetic(n), clauses).unwrap())
    })
}

pub fn bits(x: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| x >> i & 1 == 1).collect()
}

pub fn satisfies(rs: &RequirementSet, a: &[bool]) -> bool {
    rs.clauses().iter().all(|c| c.literals().iter().any(|l| a[l.label] == l.positive))
}

pub fn brute_count(rs: &RequirementSet) -> u64 {
    let n = rs.num_labels();
    (0..1u64 << n).filter(|&x| satisfies(rs, &bits(x, n))).count() as u64
}

pub fn brute_entails(rs: &RequirementSet, c: &Clause) -> bool {
    let n = rs.num_labels();
    (0..1u64 << n).all(|x| {
        let a = bits(x, n);
        !satisfies(rs, &a) || c.literals().iter().any(|l| a[l.label] == l.positive)
    })
}

/// Every admissible assignment with its cost, over all `2^n` assignments.
pub fn brute_optimum(rs: &RequirementSet, p: &[bool], w: &[f64]) -> Option<(f64, Vec<Vec<usize>>)> {
    let n = rs.num_labels();
    let mut best: Option<(f64, Vec<Vec<usize>>)> = None;
    for x in 0..1u64 << n {
        let a = bits(x, n);
        if !satisfies(rs, &a) {
            continue;
        }
        let flips: Vec<usize> = (0..n).filter(|&i| a[i] != p[i]).collect();
        let cost: f64 = flips.iter().map(|&i| w[i]).sum();
        match &mut best {
            Some((c, sets)) if (cost - *c).abs() <= 1e-12 => sets.push(flips),
            Some((c, _)) if cost > *c => {}
            _ => best = Some((cost, vec![flips])),
        }
    }
    best.map(|(c, mut sets)| {
        sets.sort();
        (c, sets)
    })
}
