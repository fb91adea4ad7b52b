use serde::{Deserialize, Serialize};

use super::cmatrix::{block_norm, CMatrix};
use super::eig::hermitian_eig_with;
use super::realization::QuantumRealization;
use super::Tolerances;
use crate::error::{Error, Result};
use crate::scenario::{ContextualityScenario, ProbabilisticModel};

/// Block residuals of one effect in the eigenbasis of the state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexResidual {
    pub label: String,
    pub probability: f64,
    /// `||E11 - p 1_r||_F`.
    pub support_block: f64,
    /// `||E12||_F`.
    pub off_diagonal: f64,
    /// `||E11||_F`, only for vertices with `p = 0`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub zero_block: Option<f64>,
    /// `||E22 - p 1_{d-r}||_F`. Not part of the verdict: the lower block
    /// of a trivial realization is unconstrained.
    pub lower_block_deviation: f64,
}

impl VertexResidual {
    pub fn max_residual(&self) -> f64 {
        self.support_block.max(self.off_diagonal).max(self.zero_block.unwrap_or(0.0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrivialityCertificate {
    pub dim: usize,
    pub rank: usize,
    /// Eigenvalues of the state, support first in descending order.
    pub spectrum: Vec<f64>,
    /// Eigenvalues at or below this count as zero.
    pub rank_threshold: f64,
    /// Eigenvalues within three orders of magnitude of the threshold.
    pub borderline: Vec<f64>,
    /// Columns are the eigenvectors matching `spectrum`.
    pub eigenbasis: CMatrix,
    pub vertices: Vec<VertexResidual>,
    pub max_residual: f64,
    pub tolerance: f64,
    /// Some vertex has a lower block other than `p(v) 1`.
    pub free_lower_block: bool,
    pub trivial: bool,
}

/// Rotates to the eigenbasis of the state and measures how far every
/// effect is from `p(v) 1_r ⊕ anything`.
pub fn certify_trivial(
    h: &ContextualityScenario,
    p: &ProbabilisticModel,
    r: &QuantumRealization,
    tol: &Tolerances,
) -> Result<TrivialityCertificate> {
    let n = h.num_vertices();
    if p.values().len() != n || r.effects.len() != n {
        return Err(Error::Dimension("model, realization and scenario disagree on vertex count".into()));
    }
    let d = r.dim;
    if r.rho.dim() != d || r.effects.iter().any(|e| e.dim() != d) {
        return Err(Error::Dimension(format!("operators must all have dimension {d}")));
    }
    let eig = hermitian_eig_with(&r.rho, f64::INFINITY).expect("tolerance disabled");
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.values[b].total_cmp(&eig.values[a]));
    let spectrum: Vec<f64> = order.iter().map(|&k| eig.values[k]).collect();
    let lambda_max = spectrum.first().copied().unwrap_or(0.0).max(0.0);
    let threshold = tol.rank * lambda_max;
    let rank = spectrum.iter().filter(|&&l| l > threshold).count();
    let borderline = spectrum
        .iter()
        .copied()
        .filter(|&l| l > threshold * 1e-3 && l <= threshold * 1e3 && threshold > 0.0)
        .collect();
    let mut w = CMatrix::zeros(d);
    for (new, &old) in order.iter().enumerate() {
        for i in 0..d {
            w[(i, new)] = eig.vectors[(i, old)];
        }
    }

    let probs = p.to_f64();
    let kernel = d - rank;
    let vertices: Vec<VertexResidual> = h
        .labels()
        .iter()
        .zip(&r.effects)
        .zip(&probs)
        .map(|((label, e), &q)| {
            let rotated = e.conjugate_by(&w);
            let mut e11 = rotated.block(0, 0, rank, rank);
            let e11_norm = block_norm(&e11);
            for i in 0..rank {
                e11[i * rank + i] -= q;
            }
            let mut e22 = rotated.block(rank, rank, kernel, kernel);
            for i in 0..kernel {
                e22[i * kernel + i] -= q;
            }
            VertexResidual {
                label: label.clone(),
                probability: q,
                support_block: block_norm(&e11),
                off_diagonal: block_norm(&rotated.block(0, rank, rank, kernel)),
                zero_block: (q == 0.0).then_some(e11_norm),
                lower_block_deviation: block_norm(&e22),
            }
        })
        .collect();
    let max_residual = vertices.iter().map(VertexResidual::max_residual).fold(0.0, f64::max);
    let free_lower_block = vertices.iter().any(|v| v.lower_block_deviation > tol.cert);
    Ok(TrivialityCertificate {
        dim: d,
        rank,
        spectrum,
        rank_threshold: threshold,
        borderline,
        eigenbasis: w,
        vertices,
        max_residual,
        tolerance: tol.cert,
        free_lower_block,
        trivial: max_residual <= tol.cert,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectivityReport {
    /// `||E_v^2 - E_v||_F` per vertex.
    pub residuals: Vec<f64>,
    pub projective: Vec<bool>,
    pub all_projective: bool,
}

pub fn is_projective_realization(r: &QuantumRealization, tol: f64) -> ProjectivityReport {
    let residuals: Vec<f64> = r.effects.iter().map(|e| (&(e * e) - e).frobenius_norm()).collect();
    let projective: Vec<bool> = residuals.iter().map(|&x| x <= tol).collect();
    ProjectivityReport {
        all_projective: projective.iter().all(|&b| b),
        residuals,
        projective,
    }
}
