mod common;

use common::{brute_optimum, cnf, satisfies};
use proptest::prelude::*;
use roadreq::admissibility::threshold;
use roadreq::maxsat::{apply_flips, correct, correct_item, CorrectionConfig, Infeasible, WeightVector};
use roadreq::{Prediction, ScoreVector};

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(prop_oneof![Just(1.0), Just(2.0), Just(0.5), 0.01f64..3.0], n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn optimum_matches_exhaustive(
        (rs, p, w) in cnf(1..=12, 30, 4).prop_flat_map(|rs| {
            let n = rs.num_labels();
            (Just(rs), proptest::collection::vec(any::<bool>(), n), weights(n))
        })
    ) {
        let wv = WeightVector::new(w.clone()).unwrap();
        let got = correct(&rs, &Prediction::new(p.clone()), &wv, None);
        match brute_optimum(&rs, &p, &w) {
            None => prop_assert_eq!(got, Err(Infeasible::Unsatisfiable)),
            Some((cost, sets)) => {
                let c = got.unwrap();
                prop_assert!((c.cost - cost).abs() <= 1e-12, "{} vs {}", c.cost, cost);
                prop_assert!(satisfies(&rs, c.corrected.as_slice()));
                prop_assert_eq!(&c.flipped, &sets[0]);
                prop_assert_eq!(c.flipped.clone(), p.iter().zip(c.corrected.as_slice()).enumerate().filter(|(_, (a, b))| a != b).map(|(i, _)| i).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn unit_weights_give_min_hamming_distance(
        (rs, p) in cnf(1..=12, 30, 4).prop_flat_map(|rs| {
            let n = rs.num_labels();
            (Just(rs), proptest::collection::vec(any::<bool>(), n))
        })
    ) {
        let n = rs.num_labels();
        let min_dist = (0..1u64 << n)
            .map(|x| common::bits(x, n))
            .filter(|a| satisfies(&rs, a))
            .map(|a| a.iter().zip(&p).filter(|(x, y)| x != y).count())
            .min();
        match correct(&rs, &Prediction::new(p), &WeightVector::uniform(n), None) {
            Ok(c) => prop_assert_eq!(Some(c.flipped.len()), min_dist),
            Err(_) => prop_assert_eq!(min_dist, None),
        }
    }

    #[test]
    fn correction_is_idempotent(
        (rs, p, w) in cnf(1..=12, 30, 4).prop_flat_map(|rs| {
            let n = rs.num_labels();
            (Just(rs), proptest::collection::vec(any::<bool>(), n), weights(n))
        })
    ) {
        let wv = WeightVector::new(w).unwrap();
        if let Ok(c) = correct(&rs, &Prediction::new(p), &wv, None) {
            let again = correct(&rs, &c.corrected, &wv, None).unwrap();
            prop_assert!(again.flipped.is_empty());
            prop_assert_eq!(again.cost, 0.0);
            prop_assert_eq!(again.corrected, c.corrected);
        }
    }

    #[test]
    fn adjusted_scores_rethreshold_to_correction(
        (rs, scores) in cnf(1..=10, 20, 3).prop_flat_map(|rs| {
            let n = rs.num_labels();
            (Just(rs), proptest::collection::vec(0.0f64..=1.0, n))
        }),
        theta in 0.05f64..0.95,
    ) {
        let sv = ScoreVector::new(scores).unwrap();
        let cfg = CorrectionConfig { theta, ..CorrectionConfig::default() };
        if let Ok(r) = correct_item(&rs, &sv, None, &cfg).unwrap() {
            prop_assert_eq!(threshold(&r.adjusted_scores, theta).unwrap(), r.corrected.clone());
            for i in 0..rs.num_labels() {
                if !r.flipped.contains(&i) {
                    prop_assert_eq!(r.adjusted_scores.scores()[i], sv.scores()[i]);
                }
            }
        }
    }
}

#[test]
fn flip_rule_boundaries() {
    let sv = ScoreVector::new(vec![0.5, 0.5001, 0.0, 1.0]).unwrap();
    let out = apply_flips(&sv, &[0, 1, 2, 3], 0.5, 1e-3);
    for (got, want) in out.scores().iter().zip([0.501, 0.499, 0.501, 0.499]) {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
    let out = apply_flips(&sv, &[2, 3], 0.9995, 1e-3);
    assert_eq!(out.scores()[2], 1.0);
    let out = apply_flips(&sv, &[3], 0.0, 1e-3);
    assert_eq!(out.scores()[3], 0.0);
}
