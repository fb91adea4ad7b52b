use serde::{Deserialize, Serialize};

use super::cmatrix::{CMatrix, C64};
use super::eig::psd_sqrt;
use super::realization::QuantumRealization;
use super::Tolerances;
use crate::error::{Error, Result};
use crate::scenario::ContextualityScenario;

/// Canonical dilation of an `n`-outcome POVM on `C^d` into `C^{n d}`:
/// `V` stacks `sqrt(E_a)`, `Π_a` projects onto the `a`-th block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NaimarkDilation {
    pub dim: usize,
    /// Dimension of the dilation space (rows of `V`).
    pub dilated_dim: usize,
    /// `V` as `dilated_dim` rows of length `dim`.
    pub isometry: Vec<Vec<C64>>,
    pub projectors: Vec<CMatrix>,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

pub fn naimark_dilate(effects: &[CMatrix], tol: &Tolerances) -> Result<NaimarkDilation> {
    let d = effects.first().map(CMatrix::dim).ok_or_else(|| Error::InvalidPovm("empty POVM".into()))?;
    if effects.iter().any(|e| e.dim() != d) {
        return Err(Error::Dimension("POVM elements differ in dimension".into()));
    }
    let mut total = CMatrix::zeros(d);
    for e in effects {
        total = &total + e;
    }
    let residual = (&total - &CMatrix::identity(d)).frobenius_norm();
    if residual > tol.sum {
        return Err(Error::InvalidPovm(format!("effects sum to identity only within {residual:.3e}")));
    }
    let n = effects.len();
    let mut isometry = Vec::with_capacity(n * d);
    let mut projectors = Vec::with_capacity(n);
    for (a, e) in effects.iter().enumerate() {
        isometry.extend(psd_sqrt(e, tol)?.rows());
        let mut pi = CMatrix::zeros(n * d);
        for i in a * d..(a + 1) * d {
            pi[(i, i)] = C64::new(1.0, 0.0);
        }
        projectors.push(pi);
    }
    Ok(NaimarkDilation {
        dim: d,
        dilated_dim: n * d,
        isometry,
        projectors,
    })
}

impl NaimarkDilation {
    /// `V^dagger M V` for an operator `M` on the dilation space.
    pub fn compress(&self, m: &CMatrix) -> CMatrix {
        let (n, d) = (self.dilated_dim, self.dim);
        let mut mv = vec![vec![zero(); d]; n];
        for (k, row) in mv.iter_mut().enumerate() {
            for l in 0..n {
                let mkl = m[(k, l)];
                if mkl == zero() {
                    continue;
                }
                for (j, x) in row.iter_mut().enumerate() {
                    *x += mkl * self.isometry[l][j];
                }
            }
        }
        let mut out = CMatrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] = (0..n).map(|k| self.isometry[k][i].conj() * mv[k][j]).sum();
            }
        }
        out
    }

    /// `||V^dagger V - 1||_F`.
    pub fn isometry_error(&self) -> f64 {
        (&self.compress(&CMatrix::identity(self.dilated_dim)) - &CMatrix::identity(self.dim)).frobenius_norm()
    }

    /// Largest `||Π_a^2 - Π_a||_F`.
    pub fn idempotence_error(&self) -> f64 {
        self.projectors
            .iter()
            .map(|p| (&(p * p) - p).frobenius_norm())
            .fold(0.0, f64::max)
    }

    /// `||Σ Π_a - 1||_F`.
    pub fn completeness_error(&self) -> f64 {
        let mut sum = CMatrix::zeros(self.dilated_dim);
        for p in &self.projectors {
            sum = &sum + p;
        }
        (&sum - &CMatrix::identity(self.dilated_dim)).frobenius_norm()
    }

    /// Largest `||V^dagger Π_a V - E_a||_F`.
    pub fn reconstruction_error(&self, effects: &[CMatrix]) -> f64 {
        self.projectors
            .iter()
            .zip(effects)
            .map(|(p, e)| (&self.compress(p) - e).frobenius_norm())
            .fold(0.0, f64::max)
    }
}

/// Which dilation block a vertex occupies within each edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeIndexing {
    /// Position of the vertex in the edge, vertices in scenario order.
    Canonical,
    /// `blocks[e][k]` is the block of the `k`-th vertex of edge `e`; each
    /// row must be a permutation.
    Explicit(Vec<Vec<usize>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharedVertexEntry {
    pub vertex: String,
    pub edges: [usize; 2],
    pub blocks: [usize; 2],
    /// `||Π_v^(e) - Π_v^(e')||_F` after padding.
    pub mismatch: f64,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationConsistency {
    pub common_dim: usize,
    pub entries: Vec<SharedVertexEntry>,
    pub consistent: bool,
}

/// Dilates every edge on its own, pads all dilation spaces to the
/// largest one and compares the projectors a shared vertex receives.
pub fn check_dilation_consistency(
    h: &ContextualityScenario,
    r: &QuantumRealization,
    indexing: &OutcomeIndexing,
    tol: &Tolerances,
) -> Result<DilationConsistency> {
    if r.effects.len() != h.num_vertices() {
        return Err(Error::Dimension("effect count differs from vertex count".into()));
    }
    let blocks: Vec<Vec<usize>> = match indexing {
        OutcomeIndexing::Canonical => h.edges().iter().map(|e| (0..e.len()).collect()).collect(),
        OutcomeIndexing::Explicit(b) => {
            if b.len() != h.num_edges() {
                return Err(Error::Dimension(format!("indexing covers {} edges, scenario has {}", b.len(), h.num_edges())));
            }
            for (i, (row, e)) in b.iter().zip(h.edges()).enumerate() {
                let mut sorted = row.clone();
                sorted.sort_unstable();
                if sorted != (0..e.len()).collect::<Vec<_>>() {
                    return Err(Error::InvalidRealization(format!("indexing of edge {i} is not a permutation")));
                }
            }
            b.clone()
        }
    };
    let common_dim = h.edges().iter().map(|e| e.len() * r.dim).max().unwrap_or(0);
    // projectors[e][k]: padded projector of the k-th vertex of edge e.
    let mut projectors: Vec<Vec<CMatrix>> = Vec::with_capacity(h.num_edges());
    for (e, edge) in h.edges().iter().enumerate() {
        let mut ordered = vec![None; edge.len()];
        for (k, &v) in edge.iter().enumerate() {
            ordered[blocks[e][k]] = Some(r.effects[v].clone());
        }
        let povm: Vec<CMatrix> = ordered.into_iter().map(|m| m.expect("permutation")).collect();
        let dil = naimark_dilate(&povm, tol)?;
        projectors.push((0..edge.len()).map(|k| dil.projectors[blocks[e][k]].padded(common_dim)).collect());
    }

    let mut entries = Vec::new();
    for v in 0..h.num_vertices() {
        let hits: Vec<(usize, usize)> = h
            .edges()
            .iter()
            .enumerate()
            .filter_map(|(e, edge)| edge.iter().position(|&u| u == v).map(|k| (e, k)))
            .collect();
        for (i, &(e1, k1)) in hits.iter().enumerate() {
            for &(e2, k2) in &hits[i + 1..] {
                let mismatch = (&projectors[e1][k1] - &projectors[e2][k2]).frobenius_norm();
                entries.push(SharedVertexEntry {
                    vertex: h.label(v).to_string(),
                    edges: [e1, e2],
                    blocks: [blocks[e1][k1], blocks[e2][k2]],
                    mismatch,
                    consistent: mismatch <= tol.sum,
                });
            }
        }
    }
    Ok(DilationConsistency {
        common_dim,
        consistent: entries.iter().all(|x| x.consistent),
        entries,
    })
}
