mod common;

use std::collections::BTreeSet;

use contextuality::analysis::{enumerate_extremal, EnumerationMethod};
use contextuality::bell::{fr_product, single_party_scenario_with};
use contextuality::exactmath::rational::{format_rational, parse_rational};
use contextuality::exactmath::*;
use contextuality::scenario::{extend_model, is_valid_model, ProbabilisticModel};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn system() -> impl Strategy<Value = (Vec<Vec<i64>>, Vec<i64>, Vec<i64>)> {
    (1usize..4, 2usize..7).prop_flat_map(|(m, n)| {
        (
            prop::collection::vec(prop::collection::vec(-2i64..4, n), m),
            prop::collection::vec(-1i64..5, m),
            prop::collection::vec(-3i64..4, n),
        )
    })
}

fn matrix(a: &[Vec<i64>]) -> RationalMatrix {
    let rows: Vec<&[i64]> = a.iter().map(Vec::as_slice).collect();
    RationalMatrix::from_i64(&rows)
}

fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

fn dot(c: &[Rational], x: &[Rational]) -> Rational {
    c.iter().zip(x).map(|(a, b)| a * b).fold(Rational::zero(), |acc, t| acc + t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dd_vertices_are_feasible_and_complete((a, b, _) in system()) {
        let m = matrix(&a);
        let rhs = ints(&b);
        let vertices = dd_vertices(&m, &rhs).unwrap();
        for v in vertices.iter() {
            prop_assert_eq!(m.mul_vec(v).unwrap(), rhs.clone());
            prop_assert!(v.iter().all(|x| !x.is_negative()));
        }
        let got: BTreeSet<Vec<Rational>> = vertices.into_vec().into_iter().collect();
        prop_assert_eq!(got, common::oracle_vertices(&a, &b, m.cols()));
    }

    #[test]
    fn lp_optimum_sits_on_a_vertex((a, b, c) in system()) {
        let m = matrix(&a);
        let rhs = ints(&b);
        let obj = ints(&c);
        let vertices = dd_vertices(&m, &rhs).unwrap();
        let prog = LinearProgram::standard(obj.clone(), m, rhs);
        match lp_solve(&prog, Sense::Minimize).unwrap() {
            LpOutcome::Infeasible => prop_assert!(vertices.is_empty()),
            LpOutcome::Unbounded => prop_assert!(!vertices.is_empty()),
            LpOutcome::Optimal { value, point } => {
                prop_assert_eq!(dot(&obj, &point), value.clone());
                let best = vertices.iter().map(|v| dot(&obj, v)).min().expect("feasible polytope has a vertex");
                prop_assert_eq!(best, value);
            }
        }
    }

    #[test]
    fn null_space_dimension((a, _, _) in system()) {
        let m = matrix(&a);
        let basis = null_space(&m);
        prop_assert_eq!(basis.len(), m.cols() - m.rank());
        for v in &basis {
            prop_assert!(m.mul_vec(v).unwrap().iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn rationals_stay_canonical(a in -50i64..50, b in 1i64..50, c in -50i64..50, d in 1i64..50) {
        let x = rat(a, b);
        let y = rat(c, d);
        let mut results = vec![&x + &y, &x - &y, &x * &y];
        if !y.is_zero() {
            results.push(&x / &y);
        }
        for r in results {
            prop_assert!(r.denom().is_positive());
            prop_assert!(r.numer().gcd(r.denom()).is_one());
            prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
    }

    #[test]
    fn scenario_invariants(seed in 0u64..5_000) {
        let h = common::random_hypergraph(seed);
        let a = h.incidence_matrix();
        let ones = vec![Rational::one(); h.num_edges()];
        let all: Vec<String> = h.labels().to_vec();
        let whole = h.induce(&all).unwrap();
        prop_assert_eq!(&whole.scenario, &h);
        prop_assert!(!whole.empty_edge);

        for v in enumerate_extremal(&h, EnumerationMethod::Dd).unwrap().iter() {
            prop_assert_eq!(a.mul_vec(v).unwrap(), ones.clone());
            let p = ProbabilisticModel::new(v.clone());
            let support = p.support();
            let induced = h.induce_indices(&support).unwrap();
            prop_assert!(induced.scenario.validate().is_empty());
            let labels: Vec<String> = induced.scenario.labels().to_vec();
            let again = induced.scenario.induce(&labels).unwrap();
            prop_assert_eq!(&again.scenario, &induced.scenario);

            let p_s = p.restrict(&support);
            let extended = extend_model(&h, &support, &p_s).unwrap();
            prop_assert_eq!(&extended, &p);
            prop_assert_eq!(extended.restrict(&support), p_s);
        }

        // Any subset that meets every edge induces a valid scenario.
        let half: Vec<usize> = (0..h.num_vertices()).filter(|v| v % 2 == 0).collect();
        let induced = h.induce_indices(&half).unwrap();
        if !induced.empty_edge {
            prop_assert!(induced.scenario.validate().is_empty());
        }
    }

    #[test]
    fn products_are_valid_scenarios(a in prop::collection::vec(1usize..4, 1..3), b in prop::collection::vec(1usize..4, 1..3)) {
        let ha = single_party_scenario_with(&a).unwrap();
        let hb = single_party_scenario_with(&b).unwrap();
        let (h, _) = fr_product(&ha, &hb);
        prop_assert!(h.validate().is_empty());
        prop_assert_eq!(h.num_vertices(), ha.num_vertices() * hb.num_vertices());
        // The uniform product model is normalized on every edge.
        let n = h.num_vertices();
        let values: Vec<Rational> = (0..n)
            .map(|v| {
                let (i, j) = (v / hb.num_vertices(), v % hb.num_vertices());
                let da = ha.edges().iter().find(|e| e.contains(&i)).unwrap().len() as i64;
                let db = hb.edges().iter().find(|e| e.contains(&j)).unwrap().len() as i64;
                rat(1, da * db)
            })
            .collect();
        prop_assert!(is_valid_model(&h, &ProbabilisticModel::new(values)));
    }
}
