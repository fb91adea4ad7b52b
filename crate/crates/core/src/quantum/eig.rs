//! Cyclic Jacobi eigendecomposition for Hermitian matrices.

use super::cmatrix::{CMatrix, C64};
use super::Tolerances;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Eigenvalues in ascending order; column `k` of `vectors` belongs to
/// `values[k]`.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.vectors.dim()).map(|i| self.vectors[(i, k)]).collect()
    }

    /// `V f(diag) V^dagger`.
    pub fn recompose(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.vectors.dim();
        let mut out = CMatrix::zeros(n);
        for k in 0..n {
            let lam = f(self.values[k]);
            if lam == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * lam;
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Rejects inputs further than `tol` (scaled by the matrix size) from
/// Hermitian, then diagonalizes the Hermitian part.
pub fn hermitian_eig_with(m: &CMatrix, tol: f64) -> Result<Eigen> {
    let scale = m.frobenius_norm().max(1.0);
    let err = m.hermiticity_error();
    if err > tol * scale {
        return Err(Error::NotHermitian(err));
    }
    Ok(jacobi(m.hermitian_part()))
}

pub fn hermitian_eig(m: &CMatrix) -> Result<Eigen> {
    hermitian_eig_with(m, Tolerances::default().herm)
}

fn jacobi(mut a: CMatrix) -> Eigen {
    let n = a.dim();
    let mut v = CMatrix::identity(n);
    let norm = a.frobenius_norm();
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= OFF_DIAGONAL_TOL * norm {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let theta = 0.5 * f64::atan2(2.0 * r, a[(q, q)].re - a[(p, p)].re);
                let (s, c) = theta.sin_cos();
                // U = diag(1, conj(phase)) * [[c, s], [-s, c]]
                let u00 = C64::new(c, 0.0);
                let u01 = C64::new(s, 0.0);
                let u10 = -phase.conj() * s;
                let u11 = phase.conj() * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * u00 + akq * u10;
                    a[(k, q)] = akp * u01 + akq * u11;
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * u00 + vkq * u10;
                    v[(k, q)] = vkp * u01 + vkq * u11;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = u00.conj() * apk + u10.conj() * aqk;
                    a[(q, k)] = u01.conj() * apk + u11.conj() * aqk;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMatrix::zeros(n);
    for (new, &old) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, new)] = v[(i, old)];
        }
    }
    Eigen { values, vectors }
}

/// Principal square root of a PSD matrix. Eigenvalues in `[-tol_psd, 0)`
/// are clipped to zero; anything more negative is an error.
pub fn psd_sqrt(m: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let eig = hermitian_eig_with(m, tol.herm)?;
    if eig.min() < -tol.psd {
        return Err(Error::InvalidPovm(format!("effect has eigenvalue {:.3e}", eig.min())));
    }
    Ok(eig.recompose(|l| l.max(0.0).sqrt()))
}

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues set to 0).
pub fn psd_projection(m: &CMatrix) -> CMatrix {
    jacobi(m.hermitian_part()).recompose(|l| l.max(0.0))
}
