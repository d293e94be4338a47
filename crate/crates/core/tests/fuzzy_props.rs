mod common;

use common::{cnf, satisfies};
use proptest::prelude::*;
use roadreq::fuzzy::{clause_eval, loss, LossConfig, TNorm};
use roadreq::{Clause, RequirementSet, ScoreVector};

fn values(c: &Clause, o: &[f64]) -> Vec<f64> {
    c.literals().iter().map(|l| if l.positive { o[l.label] } else { 1.0 - o[l.label] }).collect()
}

/// Closed-form clause degree.
fn degree(t: TNorm, v: &[f64]) -> f64 {
    match t {
        TNorm::Product => 1.0 - v.iter().map(|x| 1.0 - x).product::<f64>(),
        TNorm::Goedel => v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        TNorm::Lukasiewicz => v.iter().sum::<f64>().min(1.0),
    }
}

fn oracle_loss(rs: &RequirementSet, o: &[f64], t: TNorm, alpha: f64) -> f64 {
    alpha * rs.clauses().iter().map(|c| 1.0 - degree(t, &values(c, o))).sum::<f64>()
}

/// Smallest distance to a kink of the penalty at `o`.
fn margin(rs: &RequirementSet, o: &[f64], t: TNorm) -> f64 {
    rs.clauses()
        .iter()
        .map(|c| {
            let mut v = values(c, o);
            match t {
                TNorm::Product => f64::INFINITY,
                TNorm::Lukasiewicz => (v.iter().sum::<f64>() - 1.0).abs(),
                TNorm::Goedel => {
                    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
                    if v.len() < 2 {
                        f64::INFINITY
                    } else {
                        v[0] - v[1]
                    }
                }
            }
        })
        .fold(f64::INFINITY, f64::min)
}

fn instance() -> impl Strategy<Value = (RequirementSet, Vec<f64>)> {
    cnf(1..=12, 20, 5).prop_flat_map(|rs| {
        let n = rs.num_labels();
        (Just(rs), proptest::collection::vec(0.0f64..=1.0, n))
    })
}

fn tnorm() -> impl Strategy<Value = TNorm> {
    prop_oneof![Just(TNorm::Product), Just(TNorm::Goedel), Just(TNorm::Lukasiewicz)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn loss_matches_closed_form((rs, o) in instance(), t in tnorm(), alpha in 0.1f64..100.0) {
        let r = loss(&rs, &ScoreVector::new(o.clone()).unwrap(), &LossConfig::new(t, alpha).unwrap()).unwrap();
        let want = oracle_loss(&rs, &o, t, alpha);
        prop_assert!((r.total - want).abs() <= 1e-9 * want.max(1.0), "{} vs {}", r.total, want);
        for (c, d) in rs.clauses().iter().zip(&r.per_clause) {
            prop_assert!((0.0..=1.0).contains(d));
            prop_assert!((d - degree(t, &values(c, &o))).abs() <= 1e-12);
        }
    }

    #[test]
    fn degrees_are_ordered((rs, o) in instance()) {
        let sv = ScoreVector::new(o).unwrap();
        for c in rs.clauses() {
            let g = clause_eval(TNorm::Goedel, c, &sv);
            let p = clause_eval(TNorm::Product, c, &sv);
            let l = clause_eval(TNorm::Lukasiewicz, c, &sv);
            prop_assert!(g <= p + 1e-12 && p <= l + 1e-12, "{g} {p} {l}");
        }
    }

    #[test]
    fn crisp_scores_agree_with_satisfaction(rs in cnf(1..=12, 20, 5), bits in any::<u64>(), t in tnorm()) {
        let n = rs.num_labels();
        let a = common::bits(bits, n);
        let o: Vec<f64> = a.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        let r = loss(&rs, &ScoreVector::new(o).unwrap(), &LossConfig::new(t, 1.0).unwrap()).unwrap();
        for (c, d) in rs.clauses().iter().zip(&r.per_clause) {
            prop_assert_eq!(*d, if c.is_satisfied_by(&a) { 1.0 } else { 0.0 });
        }
        prop_assert_eq!(r.total == 0.0, satisfies(&rs, &a));
    }

    #[test]
    fn fold_order_does_not_matter((rs, o) in instance(), t in tnorm(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let sv = ScoreVector::new(o.clone()).unwrap();
        for c in rs.clauses() {
            let mut v = values(c, &o);
            v.shuffle(&mut rng);
            let folded = v[1..].iter().fold(v[0], |acc, &x| t.disjunction(acc, x));
            prop_assert!((folded - clause_eval(t, c, &sv)).abs() <= 1e-12);
        }
    }

    #[test]
    fn alpha_scales_linearly((rs, o) in instance(), t in tnorm(), alpha in 0.1f64..100.0) {
        let sv = ScoreVector::new(o).unwrap();
        let one = loss(&rs, &sv, &LossConfig::new(t, 1.0).unwrap()).unwrap();
        let scaled = loss(&rs, &sv, &LossConfig::new(t, alpha).unwrap()).unwrap();
        prop_assert!((scaled.total - alpha * one.total).abs() <= 1e-9 * scaled.total.max(1.0));
        for (g1, ga) in one.gradient.iter().zip(&scaled.gradient) {
            prop_assert!((ga - alpha * g1).abs() <= 1e-9 * ga.abs().max(1.0));
        }
    }

    #[test]
    fn gradient_matches_finite_differences((rs, o) in instance(), t in tnorm()) {
        prop_assume!(margin(&rs, &o, t) >= 1e-3);
        let r = loss(&rs, &ScoreVector::new(o.clone()).unwrap(), &LossConfig::new(t, 1.0).unwrap()).unwrap();
        let h = 1e-6;
        for j in 0..o.len() {
            let mut up = o.clone();
            up[j] += h;
            let mut down = o.clone();
            down[j] -= h;
            let fd = (oracle_loss(&rs, &up, t, 1.0) - oracle_loss(&rs, &down, t, 1.0)) / (2.0 * h);
            prop_assert!((fd - r.gradient[j]).abs() <= 1e-4 * r.gradient[j].abs().max(1.0), "label {j}: {fd} vs {}", r.gradient[j]);
        }
    }

    #[test]
    fn loss_is_bounded((rs, o) in instance(), t in tnorm(), alpha in 0.1f64..10.0) {
        let r = loss(&rs, &ScoreVector::new(o).unwrap(), &LossConfig::new(t, alpha).unwrap()).unwrap();
        prop_assert!(r.total >= 0.0 && r.total <= alpha * rs.len() as f64 + 1e-9);
    }
}
