//! Two-phase dense tableau simplex over exact rationals.
//!
//! Pivoting follows Bland's rule (lowest-index entering column, lowest-index
//! leaving basic variable among ratio ties), so it terminates without any
//! anti-cycling perturbation.

use num_traits::{One, Signed, Zero};

use super::matrix::RationalMatrix;
use super::rational::{Rational, RationalVector};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// `optimize objective·x  s.t.  equalities·x = rhs`, with `x_j >= 0` wherever
/// `nonnegative[j]` is set.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: RationalVector,
    pub equalities: RationalMatrix,
    pub rhs: RationalVector,
    pub nonnegative: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, point: RationalVector },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn point(&self) -> Option<&RationalVector> {
        match self {
            LpOutcome::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }
}

impl LinearProgram {
    /// All variables nonnegative.
    pub fn standard(objective: RationalVector, equalities: RationalMatrix, rhs: RationalVector) -> Self {
        let n = equalities.cols();
        Self {
            objective,
            equalities,
            rhs,
            nonnegative: vec![true; n],
        }
    }

    fn check(&self) -> Result<()> {
        let n = self.equalities.cols();
        if self.objective.len() != n || self.nonnegative.len() != n {
            return Err(Error::Dimension(format!(
                "objective/flags length {}/{} for {} variables",
                self.objective.len(),
                self.nonnegative.len(),
                n
            )));
        }
        if self.rhs.len() != self.equalities.rows() {
            return Err(Error::Dimension(format!(
                "rhs length {} for {} equality rows",
                self.rhs.len(),
                self.equalities.rows()
            )));
        }
        Ok(())
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.width]
    }

    fn pivot(&mut self, objective: &mut [Rational], row: usize, col: usize) {
        let inv = self.rows[row][col].recip();
        for v in self.rows[row].iter_mut() {
            if !v.is_zero() {
                *v = &*v * &inv;
            }
        }
        let pivot_row = self.rows[row].clone();
        let eliminate = |target: &mut [Rational]| {
            let factor = target[col].clone();
            if factor.is_zero() {
                return;
            }
            for (t, p) in target.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *t = &*t - &factor * p;
                }
            }
        };
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i != row {
                eliminate(r);
            }
        }
        eliminate(objective);
        self.basis[row] = col;
    }

    /// Reduced-cost row for `cost`, with the negated objective value in the
    /// last slot.
    fn objective_row(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut z: Vec<Rational> = cost.to_vec();
        z.push(Rational::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (zj, tj) in z.iter_mut().zip(&self.rows[i]) {
                if !tj.is_zero() {
                    *zj = &*zj - cb * tj;
                }
            }
        }
        z
    }

    /// Runs Bland-rule pivots minimizing `objective` over the columns
    /// allowed by `eligible`. Returns false when unbounded.
    fn optimize(&mut self, objective: &mut [Rational], eligible: &dyn Fn(usize) -> bool) -> bool {
        loop {
            let entering = (0..self.width).find(|&j| eligible(j) && objective[j].is_negative());
            let Some(col) = entering else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((row, _)) = best else {
                return false;
            };
            self.pivot(objective, row, col);
        }
    }
}

/// Exact simplex solve. Infeasible and unbounded programs are reported as
/// outcomes rather than errors.
pub fn lp_solve(prob: &LinearProgram, sense: Sense) -> Result<LpOutcome> {
    prob.check()?;
    let m = prob.equalities.rows();
    let n = prob.equalities.cols();

    // Split free variables: x_j = x_j+ - x_j-.
    let mut columns: Vec<(usize, bool)> = Vec::new();
    for j in 0..n {
        columns.push((j, true));
        if !prob.nonnegative[j] {
            columns.push((j, false));
        }
    }
    let structural = columns.len();
    let width = structural + m;

    let sign = match sense {
        Sense::Minimize => Rational::one(),
        Sense::Maximize => -Rational::one(),
    };
    let mut cost: Vec<Rational> = columns
        .iter()
        .map(|&(j, pos)| {
            let c = &prob.objective[j] * &sign;
            if pos {
                c
            } else {
                -c
            }
        })
        .collect();
    cost.extend(std::iter::repeat_n(Rational::zero(), m));

    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let flip = prob.rhs[i].is_negative();
        let mut row: Vec<Rational> = columns
            .iter()
            .map(|&(j, pos)| {
                let a = prob.equalities.get(i, j).clone();
                let a = if pos { a } else { -a };
                if flip {
                    -a
                } else {
                    a
                }
            })
            .collect();
        for k in 0..m {
            row.push(if k == i { Rational::one() } else { Rational::zero() });
        }
        row.push(if flip { -prob.rhs[i].clone() } else { prob.rhs[i].clone() });
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        basis: (structural..width).collect(),
        width,
    };

    // Phase 1: minimize the sum of artificials.
    let phase1_cost: Vec<Rational> = (0..width)
        .map(|j| if j >= structural { Rational::one() } else { Rational::zero() })
        .collect();
    let mut z = t.objective_row(&phase1_cost);
    t.optimize(&mut z, &|_| true);
    if !z[width].is_zero() {
        return Ok(LpOutcome::Infeasible);
    }

    // Drive zero-level artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= structural {
            match (0..structural).find(|&j| !t.rows[i][j].is_zero()) {
                Some(col) => {
                    t.pivot(&mut z, i, col);
                }
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    // Phase 2 on structural columns only.
    let mut z = t.objective_row(&cost);
    if !t.optimize(&mut z, &|j| j < structural) {
        return Ok(LpOutcome::Unbounded);
    }

    let mut split = vec![Rational::zero(); structural];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < structural {
            split[b] = t.rhs(i).clone();
        }
    }
    let mut point = vec![Rational::zero(); n];
    for (k, &(j, pos)) in columns.iter().enumerate() {
        if pos {
            point[j] += &split[k];
        } else {
            point[j] -= &split[k];
        }
    }
    let value = prob
        .objective
        .iter()
        .zip(&point)
        .fold(Rational::zero(), |acc, (c, x)| acc + c * x);
    Ok(LpOutcome::Optimal { value, point })
}

/// Some point of `{x >= 0 : equalities·x = rhs}`, if any.
pub fn find_feasible(equalities: &RationalMatrix, rhs: &[Rational]) -> Result<Option<RationalVector>> {
    let prob = LinearProgram::standard(vec![Rational::zero(); equalities.cols()], equalities.clone(), rhs.to_vec());
    Ok(lp_solve(&prob, Sense::Minimize)?.point().cloned())
}
