//! Dykstra alternating projections for quantum realizations of a fixed
//! model with a fixed state.
//!
//! Effects are flattened into a real vector, `d^2` coordinates per vertex:
//! the diagonal, then `√2 Re` and `√2 Im` of every entry above it, so the
//! Euclidean inner product is the Frobenius one. The affine set (edge
//! completeness plus the Born equalities) is handled through an
//! orthonormal basis of its constraint rows; the PSD cone through
//! per-vertex eigenvalue clipping.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::cmatrix::{CMatrix, C64};
use crate::quantum::eig::hermitian_eig_with;
use crate::quantum::{QuantumRealization, Tolerances};
use crate::scenario::{validate_model, ContextualityScenario, ProbabilisticModel};

/// Number of trailing affine distances kept for inspection.
pub const HISTORY_LEN: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum StateChoice {
    MaximallyMixed,
    /// Diagonal state with this spectrum.
    Spectrum(Vec<f64>),
    Matrix(CMatrix),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub dim: usize,
    pub state: StateChoice,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    /// Starting effects; random Hermitian matrices when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<Vec<CMatrix>>,
}

impl SearchConfig {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            state: StateChoice::MaximallyMixed,
            max_iter: 20_000,
            tol: 1e-8,
            seed: 0,
            init: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_state(mut self, state: StateChoice) -> Self {
        self.state = state;
        self
    }

    pub fn state_matrix(&self) -> Result<CMatrix> {
        let d = self.dim;
        let rho = match &self.state {
            StateChoice::MaximallyMixed => CMatrix::scalar(d, 1.0 / d as f64),
            StateChoice::Spectrum(s) => {
                if s.len() != d {
                    return Err(Error::Dimension(format!("spectrum has {} entries for dimension {d}", s.len())));
                }
                CMatrix::diag(s)
            }
            StateChoice::Matrix(m) => {
                if m.dim() != d {
                    return Err(Error::Dimension(format!("state has dimension {}, expected {d}", m.dim())));
                }
                m.clone()
            }
        };
        let tol = Tolerances::default();
        let eig = hermitian_eig_with(&rho, tol.herm)?;
        if eig.min() < -tol.psd || (rho.trace().re - 1.0).abs() > tol.sum {
            return Err(Error::InvalidRealization("state must be PSD with unit trace".into()));
        }
        Ok(rho)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub realization_dim: usize,
    pub rho: CMatrix,
    pub effects: Vec<CMatrix>,
    pub iterations: usize,
    /// Distance of the returned (PSD) effects to the affine set.
    pub affine_residual: f64,
    /// Distance of their affine projection to the PSD cone.
    pub psd_residual: f64,
    pub converged: bool,
    /// Affine distance after each of the last cycles, oldest first.
    pub history: Vec<f64>,
}

impl SearchResult {
    pub fn realization(&self) -> QuantumRealization {
        QuantumRealization {
            dim: self.realization_dim,
            rho: self.rho.clone(),
            effects: self.effects.clone(),
        }
    }

    /// Whether the logged affine distances never increase by more than
    /// `slack` (absolute, to absorb rounding).
    pub fn history_nonincreasing(&self, slack: f64) -> bool {
        self.history.windows(2).all(|w| w[1] <= w[0] + slack)
    }
}

fn flatten(m: &CMatrix, out: &mut [f64]) {
    let d = m.dim();
    let s = std::f64::consts::SQRT_2;
    for i in 0..d {
        out[i] = m[(i, i)].re;
    }
    let mut k = d;
    for i in 0..d {
        for j in i + 1..d {
            let z = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            out[k] = s * z.re;
            out[k + 1] = s * z.im;
            k += 2;
        }
    }
}

fn unflatten(x: &[f64], d: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = CMatrix::zeros(d);
    for i in 0..d {
        m[(i, i)] = C64::new(x[i], 0.0);
    }
    let mut k = d;
    for i in 0..d {
        for j in i + 1..d {
            let z = C64::new(s * x[k], s * x[k + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    m
}

/// Orthonormal rows `q` with targets `c`: the affine set is `{x : q x = c}`.
struct AffineSet {
    q: Vec<Vec<f64>>,
    c: Vec<f64>,
}

impl AffineSet {
    fn new(rows: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let mut q: Vec<Vec<f64>> = Vec::new();
        let mut c: Vec<f64> = Vec::new();
        for (mut row, mut b) in rows {
            let norm0 = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            // Two passes of modified Gram-Schmidt keep the basis orthonormal
            // to working precision.
            for _ in 0..2 {
                for (qi, &ci) in q.iter().zip(&c) {
                    let dot: f64 = qi.iter().zip(&row).map(|(a, b)| a * b).sum();
                    for (r, a) in row.iter_mut().zip(qi) {
                        *r -= dot * a;
                    }
                    b -= dot * ci;
                }
            }
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm <= 1e-10 * norm0.max(1.0) {
                if b.abs() > 1e-8 {
                    return Err(Error::InvalidModel("Born and completeness constraints are inconsistent".into()));
                }
                continue;
            }
            row.iter_mut().for_each(|v| *v /= norm);
            q.push(row);
            c.push(b / norm);
        }
        Ok(Self { q, c })
    }

    fn project(&self, x: &mut [f64]) {
        // Coefficients are computed against the unmodified x: x - Q^T (Q x - c).
        let coeffs: Vec<f64> = self
            .q
            .iter()
            .zip(&self.c)
            .map(|(qi, &ci)| qi.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>() - ci)
            .collect();
        for (qi, k) in self.q.iter().zip(coeffs) {
            for (xv, a) in x.iter_mut().zip(qi) {
                *xv -= k * a;
            }
        }
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn project_psd(x: &mut [f64], d: usize) {
    for chunk in x.chunks_mut(d * d) {
        let m = unflatten(chunk, d);
        let clipped = hermitian_eig_with(&m, f64::INFINITY).expect("tolerance disabled").recompose(|l| l.max(0.0));
        flatten(&clipped, chunk);
    }
}

fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let mut m = CMatrix::zeros(d);
    for i in 0..d {
        m[(i, i)] = C64::new(rng.gen_range(-1.0..=1.0), 0.0);
        for j in i + 1..d {
            let z = C64::from_polar(rng.gen_range(0.0..=1.0), rng.gen_range(0.0..std::f64::consts::TAU));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Random full-rank state: a spectrum bounded away from zero, rotated by
/// a random unitary.
pub fn random_full_rank_state(d: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..d).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let spectrum: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let h = random_hermitian(d, &mut rng);
    let u = hermitian_eig_with(&h, f64::INFINITY).expect("Hermitian by construction").vectors;
    CMatrix::diag(&spectrum).conjugate_by(&u.adjoint())
}

pub fn dykstra_find_realization(h: &ContextualityScenario, p: &ProbabilisticModel, config: &SearchConfig) -> Result<SearchResult> {
    let d = config.dim;
    if d == 0 {
        return Err(Error::Dimension("dimension must be at least 1".into()));
    }
    if !(config.tol > 0.0) {
        return Err(Error::InvalidModel("tolerance must be positive".into()));
    }
    let report = validate_model(h, p);
    if !report.is_empty() {
        return Err(Error::InvalidModel(format!("{} violation(s) of the model constraints", report.len())));
    }
    let rho = config.state_matrix()?;
    let n = h.num_vertices();
    let block = d * d;
    let dim = n * block;

    let mut identity = vec![0.0; block];
    flatten(&CMatrix::identity(d), &mut identity);
    let mut rho_flat = vec![0.0; block];
    flatten(&rho, &mut rho_flat);
    let probs = p.to_f64();
    let mut rows = Vec::new();
    for edge in h.edges() {
        for k in 0..block {
            let mut row = vec![0.0; dim];
            for &v in edge {
                row[v * block + k] = 1.0;
            }
            rows.push((row, identity[k]));
        }
    }
    for (v, &q) in probs.iter().enumerate() {
        let mut row = vec![0.0; dim];
        row[v * block..(v + 1) * block].copy_from_slice(&rho_flat);
        rows.push((row, q));
    }
    let affine = AffineSet::new(rows)?;

    let mut x = vec![0.0; dim];
    match &config.init {
        Some(init) => {
            if init.len() != n || init.iter().any(|m| m.dim() != d) {
                return Err(Error::Dimension(format!("initialization needs {n} matrices of dimension {d}")));
            }
            for (m, chunk) in init.iter().zip(x.chunks_mut(block)) {
                flatten(m, chunk);
            }
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            for chunk in x.chunks_mut(block) {
                flatten(&random_hermitian(d, &mut rng), chunk);
            }
        }
    }

    // Dykstra with corrections on both sets; the affine correction is
    // kept for form although it never changes the affine projection.
    let mut p_corr = vec![0.0; dim];
    let mut q_corr = vec![0.0; dim];
    let mut y = vec![0.0; dim];
    let mut history = std::collections::VecDeque::with_capacity(HISTORY_LEN + 1);
    let mut iterations = 0;
    let mut affine_residual = f64::INFINITY;
    let mut converged = false;
    while iterations < config.max_iter {
        iterations += 1;
        for i in 0..dim {
            y[i] = x[i] + p_corr[i];
        }
        affine.project(&mut y);
        for i in 0..dim {
            p_corr[i] += x[i] - y[i];
            x[i] = y[i] + q_corr[i];
        }
        project_psd(&mut x, d);
        for i in 0..dim {
            q_corr[i] += y[i] - x[i];
        }
        let mut ax = x.clone();
        affine.project(&mut ax);
        affine_residual = distance(&x, &ax);
        history.push_back(affine_residual);
        if history.len() > HISTORY_LEN {
            history.pop_front();
        }
        if affine_residual <= config.tol {
            converged = true;
            break;
        }
    }

    let mut ax = x.clone();
    affine.project(&mut ax);
    let mut pax = ax.clone();
    project_psd(&mut pax, d);
    let psd_residual = distance(&ax, &pax);
    converged &= psd_residual <= config.tol;
    let effects = x.chunks(block).map(|c| unflatten(c, d)).collect();
    Ok(SearchResult {
        realization_dim: d,
        rho,
        effects,
        iterations,
        affine_residual,
        psd_residual,
        converged,
        history: history.into_iter().collect(),
    })
}
