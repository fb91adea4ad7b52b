//! Shared test corpus and brute-force oracles.
//!
//! The oracles deliberately avoid the library's exact linear algebra: they
//! enumerate subsets and solve small systems over `Rational64`.

#![allow(dead_code)]

use std::collections::BTreeSet;

use contextuality::bell::{bell_scenario, BellStructure};
use contextuality::exactmath::Rational;
use contextuality::quantum::{hermitian_eig, CMatrix, C64};
use contextuality::scenario::ContextualityScenario;
use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn scenario(vertices: &[&str], edges: &[&[&str]]) -> ContextualityScenario {
    ContextualityScenario::new(vertices.to_vec(), edges.iter().map(|e| e.to_vec()).collect()).unwrap()
}

pub fn triangle() -> ContextualityScenario {
    scenario(&["0", "1", "2"], &[&["0", "1"], &["1", "2"], &["0", "2"]])
}

pub fn single_edge(n: usize) -> ContextualityScenario {
    let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    ContextualityScenario::new(labels.clone(), vec![labels]).unwrap()
}

pub fn chsh() -> ContextualityScenario {
    bell_scenario(&BellStructure::chsh()).unwrap().0
}

/// Odd cycle of two-element edges.
pub fn cycle(n: usize) -> ContextualityScenario {
    let labels: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
    let edges = (0..n).map(|i| vec![labels[i].clone(), labels[(i + 1) % n].clone()]).collect();
    ContextualityScenario::new(labels, edges).unwrap()
}

/// Random covering hypergraph on `6..=10` vertices with edges of size 1..=4.
pub fn random_hypergraph(seed: u64) -> ContextualityScenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(6..=10);
    let m = rng.gen_range(3..=8);
    let mut edges: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    for _ in 0..m {
        let size = rng.gen_range(1..=4usize).min(n);
        let mut e = BTreeSet::new();
        while e.len() < size {
            e.insert(rng.gen_range(0..n));
        }
        edges.insert(e);
    }
    let mut covered: BTreeSet<usize> = edges.iter().flatten().copied().collect();
    for v in 0..n {
        if !covered.contains(&v) {
            let mut e = BTreeSet::new();
            e.insert(v);
            if rng.gen_bool(0.5) {
                let w = rng.gen_range(0..n);
                e.insert(w);
            }
            covered.extend(e.iter().copied());
            edges.insert(e);
        }
    }
    let labels: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let edges = edges.into_iter().map(|e| e.into_iter().map(|v| labels[v].clone()).collect()).collect();
    ContextualityScenario::new(labels, edges).unwrap()
}

/// Named scenarios small enough for brute-force oracles.
pub fn corpus() -> Vec<(String, ContextualityScenario)> {
    let mut out = vec![
        ("triangle".to_string(), triangle()),
        ("edge-1".to_string(), single_edge(1)),
        ("edge-2".to_string(), single_edge(2)),
        ("edge-3".to_string(), single_edge(3)),
        ("two-edges".to_string(), scenario(&["a", "b", "c", "d"], &[&["a", "b"], &["c", "d"]])),
        (
            "single-party-2x2".to_string(),
            contextuality::bell::single_party_scenario(2, 2).unwrap(),
        ),
        (
            "single-party-2,3".to_string(),
            contextuality::bell::single_party_scenario_with(&[2, 3]).unwrap(),
        ),
        ("cycle-5".to_string(), cycle(5)),
        ("chsh".to_string(), chsh()),
        (
            "bell-2,2x2".to_string(),
            bell_scenario(&BellStructure::parse("2,2;2").unwrap()).unwrap().0,
        ),
    ];
    for seed in 0..8 {
        out.push((format!("random-{seed}"), random_hypergraph(seed)));
    }
    out
}

pub fn to_big(q: Rational64) -> Rational {
    Rational::new(BigInt::from(*q.numer()), BigInt::from(*q.denom()))
}

/// Solves `M x = b` by Gauss-Jordan; `None` unless the solution is unique.
fn solve_unique(mut m: Vec<Vec<Rational64>>, mut b: Vec<Rational64>) -> Option<Vec<Rational64>> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let pivot = (r..rows).find(|&i| !m[i][c].is_zero())?;
        m.swap(r, pivot);
        b.swap(r, pivot);
        let inv = m[r][c].recip();
        for j in 0..cols {
            m[r][j] *= inv;
        }
        b[r] *= inv;
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c];
                for j in 0..cols {
                    let t = m[r][j];
                    m[i][j] -= f * t;
                }
                let t = b[r];
                b[i] -= f * t;
            }
        }
        r += 1;
    }
    if b[r..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    Some(b[..cols].to_vec())
}

/// Vertices of `{x >= 0 : a x = b}` by brute force over supports: a
/// vertex is the unique solution supported on linearly independent
/// columns, with positive entries there.
pub fn oracle_vertices(a: &[Vec<i64>], b: &[i64], n: usize) -> BTreeSet<Vec<Rational>> {
    assert!(n <= 20, "oracle is exponential");
    let rhs: Vec<Rational64> = b.iter().map(|&v| Rational64::from_integer(v)).collect();
    let mut out = BTreeSet::new();
    if b.iter().all(|&v| v == 0) {
        out.insert(vec![Rational::zero(); n]);
    }
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
        if support.len() > a.len() {
            continue;
        }
        let m: Vec<Vec<Rational64>> = a
            .iter()
            .map(|row| support.iter().map(|&v| Rational64::from_integer(row[v])).collect())
            .collect();
        let Some(x) = solve_unique(m, rhs.clone()) else {
            continue;
        };
        if x.iter().all(|q| q.is_positive()) {
            let mut full = vec![Rational::zero(); n];
            for (&v, q) in support.iter().zip(x) {
                full[v] = to_big(q);
            }
            out.insert(full);
        }
    }
    out
}

/// Extremal models: vertices of `{p >= 0 : A p = 1}`.
pub fn oracle_extremal(h: &ContextualityScenario) -> BTreeSet<Vec<Rational>> {
    let n = h.num_vertices();
    let a: Vec<Vec<i64>> = h
        .edges()
        .iter()
        .map(|e| (0..n).map(|v| i64::from(e.contains(&v))).collect())
        .collect();
    oracle_vertices(&a, &vec![1; a.len()], n)
}

/// {0,1} assignments hitting every edge exactly once.
pub fn oracle_deterministic(h: &ContextualityScenario) -> BTreeSet<Vec<usize>> {
    let n = h.num_vertices();
    (0u32..(1 << n))
        .filter(|mask| h.edges().iter().all(|e| e.iter().filter(|&&v| mask & (1 << v) != 0).count() == 1))
        .map(|mask| (0..n).filter(|&v| mask & (1 << v) != 0).collect())
        .collect()
}

pub fn random_matrix(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let rows = (0..d)
        .map(|_| (0..d).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
        .collect();
    CMatrix::from_rows(rows).unwrap()
}

/// Random POVM: `S^{-1/2} G_a S^{-1/2}` with `G_a = B_a B_a^dagger`.
pub fn random_povm(d: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<CMatrix> {
    let g: Vec<CMatrix> = (0..n)
        .map(|_| {
            let b = random_matrix(d, rng);
            &b * &b.adjoint()
        })
        .collect();
    let mut s = CMatrix::zeros(d);
    for x in &g {
        s = &s + x;
    }
    let inv_sqrt = hermitian_eig(&s).unwrap().recompose(|l| 1.0 / l.sqrt());
    g.iter().map(|x| (&(&inv_sqrt * x) * &inv_sqrt).hermitian_part()).collect()
}
