mod common;

use std::collections::BTreeSet;

use contextuality::analysis::*;
use contextuality::exactmath::{null_space, Rational};
use contextuality::scenario::{is_valid_model, ProbabilisticModel};
use num_traits::{One, Zero};
use proptest::prelude::*;

#[test]
fn enumerations_match_the_brute_force_oracle() {
    for (name, h) in common::corpus() {
        let dd: BTreeSet<Vec<Rational>> = enumerate_extremal(&h, EnumerationMethod::Dd).unwrap().into_vec().into_iter().collect();
        let support: BTreeSet<Vec<Rational>> =
            enumerate_extremal(&h, EnumerationMethod::Support).unwrap().into_vec().into_iter().collect();
        let oracle = common::oracle_extremal(&h);
        assert_eq!(dd, oracle, "{name}: double description");
        assert_eq!(support, oracle, "{name}: support search");

        let det: BTreeSet<Vec<usize>> = enumerate_deterministic(&h).into_iter().map(|d| d.support).collect();
        assert_eq!(det, common::oracle_deterministic(&h), "{name}: deterministic");
    }
}

#[test]
fn corpus_invariants() {
    for (name, h) in common::corpus() {
        let n = h.num_vertices();
        let vertices = enumerate_extremal(&h, EnumerationMethod::Dd).unwrap();

        for d in enumerate_deterministic(&h) {
            let p = d.to_model(n);
            assert!(vertices.contains(p.values()), "{name}: deterministic model not extremal");
            assert!(is_extremal(&h, &p).unwrap().extremal);
        }

        for v in vertices.iter() {
            let p = ProbabilisticModel::new(v.clone());
            assert!(is_extremal(&h, &p).unwrap().extremal, "{name}: vertex not certified extremal");
            let report = classify_model(&h, &p).unwrap();
            assert!(report.valid && report.extremal);
            assert_eq!(report.deterministic, p.is_deterministic());
            if let Some(dec) = &report.decomposition {
                assert_eq!(dec.mixture(n), p, "{name}: decomposition");
            }
        }

        // A two-vertex midpoint is never extremal, and is classical when
        // both endpoints are deterministic.
        let list: Vec<_> = vertices.iter().cloned().collect();
        if list.len() >= 2 {
            let half = Rational::new(1.into(), 2.into());
            let mid: Vec<Rational> = list[0].iter().zip(&list[1]).map(|(a, b)| (a + b) * &half).collect();
            let p = ProbabilisticModel::new(mid);
            assert!(is_valid_model(&h, &p));
            assert!(!is_extremal(&h, &p).unwrap().extremal, "{name}: midpoint extremal");
            let both_det = list[..2].iter().all(|v| v.iter().all(|q| q.is_zero() || q.is_one()));
            if both_det {
                let dec = is_classical(&h, &p).unwrap().expect("mixture of deterministic models");
                assert_eq!(dec.mixture(n), p);
            }
        }

        if let UniquenessResult::Unique(p) = has_unique_model(&h).unwrap() {
            if p.values().iter().all(|q| q > &Rational::zero()) {
                assert!(null_space(&h.incidence_matrix()).is_empty(), "{name}: positive unique model with kernel");
            }
        }
    }
}

#[test]
fn chsh_counts() {
    let h = common::chsh();
    assert_eq!(enumerate_deterministic(&h).len(), 16);
    let vertices = enumerate_extremal(&h, EnumerationMethod::Dd).unwrap();
    assert_eq!(vertices.len(), 24);
    let indeterministic = vertices.iter().filter(|v| !ProbabilisticModel::new((*v).clone()).is_deterministic()).count();
    assert_eq!(indeterministic, 8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn methods_agree_on_random_hypergraphs(seed in 100u64..10_000) {
        let h = common::random_hypergraph(seed);
        let dd = enumerate_extremal(&h, EnumerationMethod::Dd).unwrap();
        let support = enumerate_extremal(&h, EnumerationMethod::Support).unwrap();
        prop_assert_eq!(&dd, &support);
        for v in dd.iter() {
            prop_assert!(is_valid_model(&h, &ProbabilisticModel::new(v.clone())));
        }
    }

    #[test]
    fn classical_mixtures_are_valid(seed in 0u64..10_000, w in 1i64..10) {
        let h = common::random_hypergraph(seed);
        let det = enumerate_deterministic(&h);
        prop_assume!(det.len() >= 2);
        let n = h.num_vertices();
        let a = Rational::new(w.into(), 10.into());
        let b = Rational::one() - &a;
        let values: Vec<Rational> = det[0]
            .to_model(n)
            .values()
            .iter()
            .zip(det[det.len() - 1].to_model(n).values())
            .map(|(x, y)| x * &a + y * &b)
            .collect();
        let p = ProbabilisticModel::new(values);
        prop_assert!(is_valid_model(&h, &p));
        let dec = is_classical(&h, &p).unwrap().expect("explicit mixture");
        prop_assert_eq!(dec.mixture(n), p);
    }
}
