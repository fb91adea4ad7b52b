//! Hermitian linear algebra for quantum realizations of probabilistic
//! models: validation, Born-rule evaluation, triviality certificates,
//! projectivity, Naimark dilations and the zero-trace / constant-effect
//! lemma checks.

pub mod certify;
pub mod cmatrix;
pub mod eig;
pub mod lemmas;
pub mod naimark;
pub mod realization;

use serde::{Deserialize, Serialize};

pub use certify::{certify_trivial, is_projective_realization, ProjectivityReport, TrivialityCertificate, VertexResidual};
pub use cmatrix::{CMatrix, C64};
pub use eig::{hermitian_eig, psd_projection, psd_sqrt, Eigen};
pub use lemmas::{check_zero_trace_structure, probe_constant_effect, ProbeReport, ZeroTraceReport};
pub use naimark::{check_dilation_consistency, naimark_dilate, DilationConsistency, NaimarkDilation, OutcomeIndexing};
pub use realization::{
    make_trivial_realization, realized_model, validate_realization, LowerBlocks, QuantumRealization, RealizationFile,
    RealizationViolation,
};

/// Numerical tolerances shared by the quantum checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Entrywise deviation from Hermitian symmetry.
    pub herm: f64,
    /// Most negative eigenvalue still treated as PSD.
    pub psd: f64,
    /// Frobenius residual of edge completeness and Born-rule sums.
    pub sum: f64,
    /// Eigenvalues of the state at or below `rank * max eigenvalue` are
    /// treated as zero.
    pub rank: f64,
    /// Per-vertex block residual accepted by the triviality certificate.
    pub cert: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-9,
            psd: 1e-9,
            sum: 1e-9,
            rank: 1e-9,
            cert: 1e-6,
        }
    }
}

impl Tolerances {
    /// Same tolerance for the Hermiticity, PSD and completeness checks.
    pub fn uniform(tol: f64) -> Self {
        Self {
            herm: tol,
            psd: tol,
            sum: tol,
            ..Self::default()
        }
    }
}
