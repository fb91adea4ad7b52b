use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::cmatrix::CMatrix;
use super::eig::hermitian_eig_with;
use super::Tolerances;
use crate::error::{Error, Result};
use crate::scenario::{ContextualityScenario, ProbabilisticModel};

/// State plus one effect per vertex, in scenario vertex order.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumRealization {
    pub dim: usize,
    pub rho: CMatrix,
    pub effects: Vec<CMatrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RealizationViolation {
    EffectCount { expected: usize, found: usize },
    Dimension { what: String, expected: usize, found: usize },
    NotHermitian { what: String, deviation: f64 },
    NotPsd { what: String, min_eigenvalue: f64 },
    StateTrace { trace: f64 },
    Completeness { edge: usize, vertices: Vec<String>, residual: f64 },
}

impl fmt::Display for RealizationViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EffectCount { expected, found } => write!(f, "{found} effects for {expected} vertices"),
            Self::Dimension { what, expected, found } => write!(f, "{what} has dimension {found}, expected {expected}"),
            Self::NotHermitian { what, deviation } => write!(f, "{what} is not Hermitian (deviation {deviation:.3e})"),
            Self::NotPsd { what, min_eigenvalue } => write!(f, "{what} has eigenvalue {min_eigenvalue:.3e}"),
            Self::StateTrace { trace } => write!(f, "state has trace {trace}"),
            Self::Completeness { edge, vertices, residual } => {
                write!(f, "effects of edge {edge} {{{}}} miss the identity by {residual:.3e}", vertices.join(","))
            }
        }
    }
}

/// Checks Hermiticity and positivity of the state and every effect, the
/// unit trace of the state, and completeness on every edge.
pub fn validate_realization(h: &ContextualityScenario, r: &QuantumRealization, tol: &Tolerances) -> Vec<RealizationViolation> {
    let mut out = Vec::new();
    if r.effects.len() != h.num_vertices() {
        out.push(RealizationViolation::EffectCount {
            expected: h.num_vertices(),
            found: r.effects.len(),
        });
        return out;
    }
    let mut operators: Vec<(String, &CMatrix)> = vec![("state".to_string(), &r.rho)];
    operators.extend(h.labels().iter().zip(&r.effects).map(|(l, e)| (format!("effect {l}"), e)));
    let mut dims_ok = true;
    for (what, m) in &operators {
        if m.dim() != r.dim {
            dims_ok = false;
            out.push(RealizationViolation::Dimension {
                what: what.clone(),
                expected: r.dim,
                found: m.dim(),
            });
            continue;
        }
        let scale = m.frobenius_norm().max(1.0);
        let dev = m.hermiticity_error();
        if dev > tol.herm * scale {
            out.push(RealizationViolation::NotHermitian {
                what: what.clone(),
                deviation: dev,
            });
            continue;
        }
        let eig = hermitian_eig_with(m, f64::INFINITY).expect("tolerance disabled");
        if eig.min() < -tol.psd {
            out.push(RealizationViolation::NotPsd {
                what: what.clone(),
                min_eigenvalue: eig.min(),
            });
        }
    }
    if r.rho.dim() == r.dim {
        let trace = r.rho.trace().re;
        if (trace - 1.0).abs() > tol.sum {
            out.push(RealizationViolation::StateTrace { trace });
        }
    }
    if dims_ok {
        let identity = CMatrix::identity(r.dim);
        for (i, e) in h.edges().iter().enumerate() {
            let mut sum = CMatrix::zeros(r.dim);
            for &v in e {
                sum = &sum + &r.effects[v];
            }
            let residual = (&sum - &identity).frobenius_norm();
            if residual > tol.sum {
                out.push(RealizationViolation::Completeness {
                    edge: i,
                    vertices: h.edge_labels(i),
                    residual,
                });
            }
        }
    }
    out
}

/// Born-rule probabilities `tr(rho E_v)`.
pub fn realized_model(r: &QuantumRealization) -> Vec<f64> {
    r.effects.iter().map(|e| r.rho.trace_product(e).re).collect()
}

/// Lower-right blocks of a trivial realization.
#[derive(Clone, Debug, Default)]
pub enum LowerBlocks {
    /// `p(v) * identity` on the kernel of the state.
    #[default]
    Scaled,
    /// One `(d - r)`-dimensional block per vertex.
    Explicit(Vec<CMatrix>),
}

/// `rho = diag(spectrum) ⊕ 0`, `E_v = p(v) 1_r ⊕ lower_v`. The spectrum
/// defaults to uniform `1/r`. The result is validated before returning.
pub fn make_trivial_realization(
    h: &ContextualityScenario,
    p: &ProbabilisticModel,
    dim: usize,
    rank: usize,
    spectrum: Option<&[f64]>,
    lower: &LowerBlocks,
    tol: &Tolerances,
) -> Result<QuantumRealization> {
    if rank == 0 || rank > dim {
        return Err(Error::Dimension(format!("rank {rank} must lie in 1..={dim}")));
    }
    if p.values().len() != h.num_vertices() {
        return Err(Error::Dimension("model length differs from vertex count".into()));
    }
    let uniform = vec![1.0 / rank as f64; rank];
    let spectrum = spectrum.unwrap_or(&uniform);
    if spectrum.len() != rank {
        return Err(Error::Dimension(format!("spectrum has {} entries for rank {rank}", spectrum.len())));
    }
    if spectrum.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidRealization("spectrum must be strictly positive".into()));
    }
    if (spectrum.iter().sum::<f64>() - 1.0).abs() > tol.sum {
        return Err(Error::InvalidRealization("spectrum must sum to 1".into()));
    }
    let kernel = dim - rank;
    let probs = p.to_f64();
    let lower: Vec<CMatrix> = match lower {
        LowerBlocks::Scaled => probs.iter().map(|&q| CMatrix::scalar(kernel, q)).collect(),
        LowerBlocks::Explicit(blocks) => {
            if blocks.len() != h.num_vertices() {
                return Err(Error::Dimension(format!("{} lower blocks for {} vertices", blocks.len(), h.num_vertices())));
            }
            if let Some(b) = blocks.iter().find(|b| b.dim() != kernel) {
                return Err(Error::Dimension(format!("lower block of dimension {}, expected {kernel}", b.dim())));
            }
            blocks.clone()
        }
    };
    let rho = CMatrix::diag(spectrum).direct_sum(&CMatrix::zeros(kernel));
    let effects = probs
        .iter()
        .zip(&lower)
        .map(|(&q, low)| CMatrix::scalar(rank, q).direct_sum(low))
        .collect();
    let r = QuantumRealization { dim, rho, effects };
    let report = validate_realization(h, &r, tol);
    if !report.is_empty() {
        let msgs: Vec<String> = report.iter().map(ToString::to_string).collect();
        return Err(Error::InvalidRealization(msgs.join("; ")));
    }
    Ok(r)
}

/// On-disk realization: effects keyed by vertex label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationFile {
    pub dim: usize,
    pub rho: CMatrix,
    pub effects: BTreeMap<String, CMatrix>,
}

impl QuantumRealization {
    pub fn to_file(&self, h: &ContextualityScenario) -> RealizationFile {
        RealizationFile {
            dim: self.dim,
            rho: self.rho.clone(),
            effects: h.labels().iter().cloned().zip(self.effects.iter().cloned()).collect(),
        }
    }

    /// Aligns effects to the scenario's vertex order; every label must be
    /// present exactly once.
    pub fn from_file(h: &ContextualityScenario, file: &RealizationFile) -> Result<Self> {
        if let Some(extra) = file.effects.keys().find(|l| h.vertex_index(l).is_none()) {
            return Err(Error::UnknownVertex(extra.clone()));
        }
        let effects = h
            .labels()
            .iter()
            .map(|l| {
                file.effects
                    .get(l)
                    .cloned()
                    .ok_or_else(|| Error::Parse(format!("realization lacks an effect for vertex {l:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim: file.dim,
            rho: file.rho.clone(),
            effects,
        })
    }
}
