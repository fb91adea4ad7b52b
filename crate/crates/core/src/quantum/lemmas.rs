//! Numerical checks of two structural facts used by the no-go argument:
//! a PSD effect invisible to a PSD state lives on the state's kernel, and
//! an effect with constant expectation on enough probe states is a
//! multiple of the identity.

use serde::{Deserialize, Serialize};

use super::cmatrix::{block_norm, CMatrix, C64};
use super::eig::hermitian_eig_with;
use super::Tolerances;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroTraceReport {
    pub trace: f64,
    /// `|tr(rho E)| <= tau`, so the structural claim applies.
    pub applicable: bool,
    pub rank: usize,
    /// `1 / lambda_min` over the support of the state.
    pub conditioning: f64,
    pub product_norm: f64,
    pub e11_norm: f64,
    pub e12_norm: f64,
    /// Bound on `||E11||_F`: `tau * conditioning`.
    pub bound: f64,
    /// Bound on `||E12||_F` and `||rho E||_F`, see `check_zero_trace_structure`.
    pub off_bound: f64,
    pub holds: bool,
}

/// If `tr(rho E)` vanishes to within `tau`, checks that `rho E` and the
/// `E11`, `E12` blocks of `E` in the eigenbasis of `rho` vanish too.
///
/// `tr(E11) <= tau / lambda_min` bounds `E11` linearly, but positivity only
/// gives `||E12||_F^2 <= tr(E11) tr(E22)`, so the off-diagonal bound is
/// the larger of `tau * kappa` and `sqrt(tau * kappa * tr(E22))`.
pub fn check_zero_trace_structure(rho: &CMatrix, e: &CMatrix, tau: f64, tol: &Tolerances) -> Result<ZeroTraceReport> {
    let d = rho.dim();
    if e.dim() != d {
        return Err(Error::Dimension("state and effect differ in dimension".into()));
    }
    for (what, m) in [("state", rho), ("effect", e)] {
        let eig = hermitian_eig_with(m, tol.herm)?;
        if eig.min() < -tol.psd {
            return Err(Error::InvalidPovm(format!("{what} has eigenvalue {:.3e}", eig.min())));
        }
    }
    let eig = hermitian_eig_with(rho, tol.herm)?;
    let threshold = tol.rank * eig.max().max(0.0);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.values[b].total_cmp(&eig.values[a]));
    let rank = eig.values.iter().filter(|&&l| l > threshold).count();
    let lambda_min = order[..rank].iter().map(|&k| eig.values[k]).fold(f64::INFINITY, f64::min);
    let conditioning = if rank == 0 { 0.0 } else { 1.0 / lambda_min };
    let mut w = CMatrix::zeros(d);
    for (new, &old) in order.iter().enumerate() {
        for i in 0..d {
            w[(i, new)] = eig.vectors[(i, old)];
        }
    }
    let rotated = e.conjugate_by(&w);
    let kernel = d - rank;
    let e22_trace: f64 = (rank..d).map(|i| rotated[(i, i)].re).sum();

    let trace = rho.trace_product(e).re;
    let product_norm = (rho * e).frobenius_norm();
    let e11_norm = block_norm(&rotated.block(0, 0, rank, rank));
    let e12_norm = block_norm(&rotated.block(0, rank, rank, kernel));
    let bound = tau * conditioning;
    let off_bound = bound.max((bound * e22_trace.max(0.0)).sqrt());
    let applicable = trace.abs() <= tau;
    // ||rho E||_F <= lambda_max ||[E11 E12]||_F.
    let product_bound = eig.max() * bound.hypot(off_bound);
    let holds = !applicable || (e11_norm <= bound && e12_norm <= off_bound && product_norm <= product_bound);
    Ok(ZeroTraceReport {
        trace,
        applicable,
        rank,
        conditioning,
        product_norm,
        e11_norm,
        e12_norm,
        bound,
        off_bound,
        holds,
    })
}

/// `d` basis states then, for every `i < j`, `(|i> + |j>)/√2` and
/// `(|i> + i|j>)/√2`.
pub fn probe_states(d: usize) -> Vec<Vec<C64>> {
    let mut out = Vec::with_capacity(d * d);
    let basis = |i: usize| {
        let mut v = vec![C64::new(0.0, 0.0); d];
        v[i] = C64::new(1.0, 0.0);
        v
    };
    for i in 0..d {
        out.push(basis(i));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        for j in i + 1..d {
            for phase in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                let mut v = vec![C64::new(0.0, 0.0); d];
                v[i] = C64::new(s, 0.0);
                v[j] = phase * s;
                out.push(v);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub probes: usize,
    /// Largest `|<psi|E|psi> - alpha|` over the probes.
    pub max_deviation: f64,
    /// `||E - alpha 1||_F`.
    pub frobenius_deviation: f64,
    pub accepted: bool,
}

/// Accepts `E` as `alpha 1` when every probe expectation lies within
/// `tau` of `alpha`.
pub fn probe_constant_effect(e: &CMatrix, alpha: f64, tau: f64) -> ProbeReport {
    let d = e.dim();
    let probes = probe_states(d);
    let max_deviation = probes
        .iter()
        .map(|psi| (e.trace_product(&CMatrix::outer(psi)).re - alpha).abs())
        .fold(0.0, f64::max);
    ProbeReport {
        probes: probes.len(),
        max_deviation,
        frobenius_deviation: (e - &CMatrix::scalar(d, alpha)).frobenius_norm(),
        accepted: max_deviation <= tau,
    }
}
