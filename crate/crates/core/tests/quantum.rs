mod common;

use contextuality::analysis::{enumerate_extremal, EnumerationMethod};
use contextuality::bell::single_party_scenario_with;
use contextuality::exactmath::rat;
use contextuality::quantum::lemmas::probe_states;
use contextuality::quantum::*;
use contextuality::scenario::ProbabilisticModel;
use contextuality::search::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `V^dagger M V` computed straight from the isometry rows.
fn compress(rows: &[Vec<C64>], m: &CMatrix) -> CMatrix {
    let d = rows[0].len();
    let n = rows.len();
    let mut out = CMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                for l in 0..n {
                    acc += rows[k][i].conj() * m[(k, l)] * rows[l][j];
                }
            }
            out[(i, j)] = acc;
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn naimark_invariants(seed in any::<u64>(), d in 1usize..=4, n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let povm = common::random_povm(d, n, &mut rng);
        let dil = naimark_dilate(&povm, &Tolerances::default()).unwrap();
        prop_assert_eq!(dil.dilated_dim, n * d);
        let id = CMatrix::identity(n * d);
        prop_assert!((&compress(&dil.isometry, &id) - &CMatrix::identity(d)).frobenius_norm() <= 1e-10);
        let mut total = CMatrix::zeros(n * d);
        for (p, e) in dil.projectors.iter().zip(&povm) {
            prop_assert!((&(p * p) - p).frobenius_norm() <= 1e-10);
            prop_assert!((&compress(&dil.isometry, p) - e).frobenius_norm() <= 1e-10);
            total = &total + p;
        }
        prop_assert!((&total - &id).frobenius_norm() <= 1e-10);
    }

    #[test]
    fn born_rule_sums_to_one(seed in any::<u64>(), d in 1usize..=3, shape in prop::collection::vec(1usize..=3, 1..=3)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = single_party_scenario_with(&shape).unwrap();
        let mut effects = Vec::new();
        for &k in &shape {
            effects.extend(common::random_povm(d, k, &mut rng));
        }
        let r = QuantumRealization { dim: d, rho: random_full_rank_state(d, seed), effects };
        prop_assert!(validate_realization(&h, &r, &Tolerances::default()).is_empty());
        let q = realized_model(&r);
        for e in h.edges() {
            let s: f64 = e.iter().map(|&v| q[v]).sum();
            prop_assert!((s - 1.0).abs() <= 1e-9);
        }
    }

    /// `||E - a 1||_F <= tau` forces acceptance, and acceptance bounds the
    /// deviation by `sqrt(d (8d - 7)) tau` (each diagonal entry within tau,
    /// each off-diagonal one within `2 sqrt(2) tau`).
    #[test]
    fn constant_effect_probe(seed in any::<u64>(), d in 1usize..=4, alpha in 0.0f64..1.0, scale in -12i32..-2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tau = 1e-6;
        let h = common::random_matrix(d, &mut rng).hermitian_part();
        let unit = h.scaled(1.0 / h.frobenius_norm());
        let eps = 10f64.powi(scale);
        let e = &CMatrix::scalar(d, alpha) + &unit.scaled(eps);
        let rep = probe_constant_effect(&e, alpha, tau);
        prop_assert_eq!(rep.probes, d * d);
        if rep.frobenius_deviation <= tau * (1.0 - 1e-9) {
            prop_assert!(rep.accepted);
        }
        if rep.accepted {
            prop_assert!(rep.frobenius_deviation <= ((d * (8 * d - 7)) as f64).sqrt() * tau * (1.0 + 1e-9));
        }
        prop_assert!(probe_constant_effect(&CMatrix::scalar(d, alpha), alpha, 1e-12).accepted);
        prop_assert!(!probe_constant_effect(&(&CMatrix::scalar(d, alpha) + &unit.scaled(0.1)), alpha, tau).accepted);
    }
}

#[test]
fn probe_bound_is_attained_beyond_d_tau() {
    // Every probe sits within tau, yet the deviation is sqrt(10) tau > 2 tau.
    let tau = 1e-3;
    let mut e = CMatrix::scalar(2, 0.5 - tau);
    e[(0, 1)] = C64::new(2.0 * tau, 0.0);
    e[(1, 0)] = C64::new(2.0 * tau, 0.0);
    let rep = probe_constant_effect(&e, 0.5, tau * (1.0 + 1e-9));
    assert!(rep.accepted);
    assert!((rep.frobenius_deviation - 10f64.sqrt() * tau).abs() < 1e-12);
    assert_eq!(probe_states(2).len(), 4);
}

fn triangle_model() -> ProbabilisticModel {
    ProbabilisticModel::new(vec![rat(1, 2); 3])
}

#[test]
fn unique_model_realizations_are_trivial_for_any_state() {
    let h = common::triangle();
    let p = triangle_model();
    for seed in 0..10u64 {
        for d in [2, 3] {
            // Full rank, then rank one.
            let mut psi: Vec<C64> = (0..d).map(|k| C64::new(1.0 + k as f64, seed as f64 * 0.1)).collect();
            let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            psi.iter_mut().for_each(|z| *z /= norm);
            for state in [StateChoice::Matrix(random_full_rank_state(d, seed)), StateChoice::Matrix(CMatrix::outer(&psi))] {
                let cfg = SearchConfig::new(d).with_seed(seed).with_state(state);
                let res = dykstra_find_realization(&h, &p, &cfg).unwrap();
                assert!(res.converged);
                let cert = certify_trivial(&h, &p, &res.realization(), &Tolerances::default()).unwrap();
                assert!(cert.trivial, "seed {seed} d {d}: {}", cert.max_residual);
            }
        }
    }
}

#[test]
fn random_full_rank_states_give_trivial_realizations() {
    let h = common::chsh();
    let mut targets = vec![(common::triangle(), triangle_model())];
    for v in enumerate_extremal(&h, EnumerationMethod::Dd).unwrap().iter() {
        let p = ProbabilisticModel::new(v.clone());
        if !p.is_deterministic() {
            targets.push((h.clone(), p));
        }
    }
    assert_eq!(targets.len(), 9);
    for (scenario, p) in &targets {
        for d in [2, 3] {
            for seed in 0..20u64 {
                let rho = random_full_rank_state(d, 1000 + seed);
                let cfg = SearchConfig::new(d).with_seed(seed).with_state(StateChoice::Matrix(rho));
                let res = dykstra_find_realization(scenario, p, &cfg).unwrap();
                assert!(res.converged, "d {d} seed {seed}");
                let r = res.realization();
                assert!(validate_realization(scenario, &r, &Tolerances::uniform(10.0 * cfg.tol)).is_empty());
                for (a, b) in realized_model(&r).iter().zip(p.to_f64()) {
                    assert!((a - b).abs() <= 10.0 * cfg.tol);
                }
                let cert = certify_trivial(scenario, p, &r, &Tolerances::default()).unwrap();
                assert!(cert.trivial && cert.rank == d && cert.max_residual <= 1e-6);
                assert!(res.history_nonincreasing(0.0));
            }
        }
    }
}

#[test]
fn contrast_case_has_a_free_lower_block() {
    let h = common::single_edge(2);
    let p = ProbabilisticModel::new(vec![rat(1, 2); 2]);
    let rho = CMatrix::diag(&[1.0, 0.0]);
    let cfg = SearchConfig {
        init: Some(vec![CMatrix::diag(&[0.9, 0.8]), CMatrix::diag(&[-0.3, 0.1])]),
        ..SearchConfig::new(2).with_state(StateChoice::Matrix(rho))
    };
    let res = dykstra_find_realization(&h, &p, &cfg).unwrap();
    assert!(res.converged);
    let cert = certify_trivial(&h, &p, &res.realization(), &Tolerances::default()).unwrap();
    assert_eq!(cert.rank, 1);
    assert!(cert.trivial);
    assert!(cert.free_lower_block);
}

#[test]
fn zero_trace_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let d = rng.gen_range(2..=4);
        let k = rng.gen_range(1..d);
        let spectrum: Vec<f64> = (0..d).map(|i| if i < k { rng.gen_range(0.1..1.0) } else { 0.0 }).collect();
        let total: f64 = spectrum.iter().sum();
        let rho = CMatrix::diag(&spectrum.iter().map(|l| l / total).collect::<Vec<_>>());
        let mut e = CMatrix::zeros(d);
        let b = common::random_matrix(d - k, &mut rng);
        let block = &b * &b.adjoint();
        for i in 0..d - k {
            for j in 0..d - k {
                e[(k + i, k + j)] = block[(i, j)];
            }
        }
        let u = hermitian_eig(&common::random_matrix(d, &mut rng).hermitian_part()).unwrap().vectors;
        let rep = check_zero_trace_structure(&rho.conjugate_by(&u), &e.conjugate_by(&u), 1e-10, &Tolerances::default()).unwrap();
        assert!(rep.applicable && rep.holds);
        assert!(rep.e11_norm <= 1e-10 && rep.e12_norm <= 1e-10 && rep.product_norm <= 1e-10);
    }
}
