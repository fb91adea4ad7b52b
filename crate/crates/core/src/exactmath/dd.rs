//! Double description enumeration for polytopes `{x >= 0 : A x = b}`.
//!
//! The polytope is homogenized into the cone `{(x, t) >= 0 : A x - b t = 0}`.
//! Starting from the nonnegative orthant (generated by unit rays), each
//! equality row is intersected in input order. Two rays on opposite sides
//! of the hyperplane are combined only if they are adjacent, decided by the
//! algebraic rank of the constraints tight at both.

use num_traits::{Signed, Zero};

use super::matrix::RationalMatrix;
use super::rational::{Rational, RationalVector};
use crate::error::{Error, Result};

/// Vertices of a polytope in canonical lexicographic order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VertexSet {
    vertices: Vec<RationalVector>,
}

impl VertexSet {
    /// Sorts and deduplicates.
    pub fn new(mut vertices: Vec<RationalVector>) -> Self {
        vertices.sort();
        vertices.dedup();
        Self { vertices }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.vertices.binary_search_by(|x| x.as_slice().cmp(v)).is_ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, RationalVector> {
        self.vertices.iter()
    }

    pub fn as_slice(&self) -> &[RationalVector] {
        &self.vertices
    }

    pub fn into_vec(self) -> Vec<RationalVector> {
        self.vertices
    }
}

impl<'a> IntoIterator for &'a VertexSet {
    type Item = &'a RationalVector;
    type IntoIter = std::slice::Iter<'a, RationalVector>;
    fn into_iter(self) -> Self::IntoIter {
        self.vertices.iter()
    }
}

/// Full double-description output: bounded generators plus any recession
/// directions (nonempty only for unbounded inputs).
#[derive(Clone, Debug)]
pub struct DdOutput {
    pub vertices: VertexSet,
    pub recession_rays: Vec<RationalVector>,
}

impl DdOutput {
    pub fn is_bounded(&self) -> bool {
        self.recession_rays.is_empty()
    }
}

#[derive(Clone)]
struct Ray {
    coords: RationalVector,
    zeros: Vec<bool>,
}

impl Ray {
    fn new(mut coords: RationalVector) -> Self {
        // Rays live in the nonnegative orthant, so scaling by the first
        // nonzero keeps direction.
        if let Some(lead) = coords.iter().find(|v| !v.is_zero()).cloned() {
            for c in coords.iter_mut() {
                *c = &*c / &lead;
            }
        }
        let zeros = coords.iter().map(Zero::is_zero).collect();
        Self { coords, zeros }
    }
}

fn dot(h: &[Rational], y: &[Rational]) -> Rational {
    h.iter()
        .zip(y)
        .filter(|(a, b)| !a.is_zero() && !b.is_zero())
        .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
}

/// Vertices of `{x >= 0 : equalities·x = rhs}`.
pub fn dd_vertices(equalities: &RationalMatrix, rhs: &[Rational]) -> Result<VertexSet> {
    Ok(dd_enumerate(equalities, rhs)?.vertices)
}

pub fn dd_enumerate(equalities: &RationalMatrix, rhs: &[Rational]) -> Result<DdOutput> {
    if rhs.len() != equalities.rows() {
        return Err(Error::Dimension(format!(
            "rhs length {} for {} equality rows",
            rhs.len(),
            equalities.rows()
        )));
    }
    let n = equalities.cols();
    let dim = n + 1;

    let hyperplanes: Vec<RationalVector> = (0..equalities.rows())
        .map(|i| {
            let mut h = equalities.row(i).to_vec();
            h.push(-rhs[i].clone());
            h
        })
        .collect();

    let mut rays: Vec<Ray> = (0..dim)
        .map(|k| {
            let coords = (0..dim)
                .map(|j| if j == k { Rational::from_integer(1.into()) } else { Rational::zero() })
                .collect();
            Ray::new(coords)
        })
        .collect();

    for (k, h) in hyperplanes.iter().enumerate() {
        let processed = &hyperplanes[..k];
        let values: Vec<Rational> = rays.iter().map(|r| dot(h, &r.coords)).collect();
        let mut next: Vec<Ray> = Vec::new();
        let mut positive = Vec::new();
        let mut negative = Vec::new();
        for (i, v) in values.iter().enumerate() {
            if v.is_zero() {
                next.push(rays[i].clone());
            } else if v.is_positive() {
                positive.push(i);
            } else {
                negative.push(i);
            }
        }
        for &p in &positive {
            for &q in &negative {
                if !adjacent(&rays[p], &rays[q], processed, dim) {
                    continue;
                }
                let hp = &values[p];
                let hq = &values[q];
                let coords: RationalVector = rays[q]
                    .coords
                    .iter()
                    .zip(&rays[p].coords)
                    .map(|(yq, yp)| hp * yq - hq * yp)
                    .collect();
                next.push(Ray::new(coords));
            }
        }
        next.sort_by(|a, b| a.coords.cmp(&b.coords));
        next.dedup_by(|a, b| a.coords == b.coords);
        rays = next;
    }

    let mut vertices = Vec::new();
    let mut recession_rays = Vec::new();
    for r in rays {
        let t = &r.coords[n];
        if t.is_zero() {
            recession_rays.push(r.coords[..n].to_vec());
        } else {
            vertices.push(r.coords[..n].iter().map(|x| x / t).collect());
        }
    }
    Ok(DdOutput {
        vertices: VertexSet::new(vertices),
        recession_rays,
    })
}

/// Rank test: the constraints tight at both rays (common zero coordinates
/// plus every processed equality) must have rank `dim - 2`.
fn adjacent(a: &Ray, b: &Ray, processed: &[RationalVector], dim: usize) -> bool {
    let common: Vec<usize> = (0..dim).filter(|&j| a.zeros[j] && b.zeros[j]).collect();
    let target = dim - 2;
    if common.len() + processed.len() < target {
        return false;
    }
    if common.len() >= target {
        // The face spanned by two distinct rays has rank at most dim - 2,
        // so reaching it with unit rows alone settles the test.
        return true;
    }
    let free: Vec<usize> = (0..dim).filter(|&j| !(a.zeros[j] && b.zeros[j])).collect();
    let rows: Vec<Vec<Rational>> = processed
        .iter()
        .map(|h| free.iter().map(|&j| h[j].clone()).collect())
        .collect();
    let restricted = RationalMatrix::from_rows(rows).expect("uniform rows");
    common.len() + restricted.rank() == target
}
