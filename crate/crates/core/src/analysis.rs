//! Deterministic, classical, unique and extremal models.
//!
//! A model is extremal exactly when it is the zero-extension of the unique
//! model of the subscenario induced by its support. Both enumeration
//! routes (double description over the model polytope, and search over
//! candidate supports) are exposed so they can be cross-checked.

use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmath::rational::serde_vec;
use crate::exactmath::{dd_vertices, find_feasible, lp_solve, LinearProgram, LpOutcome, Rational, RationalMatrix, Sense, VertexSet};
use crate::scenario::{extend_model, is_valid_model, ContextualityScenario, Induced, ProbabilisticModel};

/// Support of a {0,1}-valued model, as ascending vertex indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DeterministicModel {
    pub support: Vec<usize>,
}

impl DeterministicModel {
    pub fn to_model(&self, num_vertices: usize) -> ProbabilisticModel {
        let mut values = vec![Rational::zero(); num_vertices];
        for &v in &self.support {
            values[v] = Rational::one();
        }
        ProbabilisticModel::new(values)
    }
}

/// Convex decomposition into deterministic models. Only components with
/// positive weight are kept.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalDecomposition {
    #[serde(with = "serde_vec")]
    pub weights: Vec<Rational>,
    pub components: Vec<DeterministicModel>,
}

impl ClassicalDecomposition {
    pub fn mixture(&self, num_vertices: usize) -> ProbabilisticModel {
        let mut values = vec![Rational::zero(); num_vertices];
        for (q, d) in self.weights.iter().zip(&self.components) {
            for &v in &d.support {
                values[v] += q;
            }
        }
        ProbabilisticModel::new(values)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UniquenessResult {
    /// No probabilistic model at all.
    None,
    Unique(ProbabilisticModel),
    /// Two distinct models witnessing non-uniqueness.
    Multiple(ProbabilisticModel, ProbabilisticModel),
}

impl UniquenessResult {
    pub fn unique(&self) -> Option<&ProbabilisticModel> {
        match self {
            Self::Unique(p) => Some(p),
            _ => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Unique(_) => "unique",
            Self::Multiple(..) => "multiple",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtremalityCertificate {
    pub extremal: bool,
    pub support: Vec<usize>,
    pub uniqueness: UniquenessResult,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnumerationMethod {
    /// Double description over `{A p = 1, p >= 0}`.
    Dd,
    /// Search over supports whose induced subscenario has a unique,
    /// strictly positive model.
    Support,
}

impl FromStr for EnumerationMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dd" => Ok(Self::Dd),
            "support" => Ok(Self::Support),
            other => Err(Error::Parse(format!("unknown enumeration method {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub valid: bool,
    pub deterministic: bool,
    pub classical: bool,
    pub extremal: bool,
    pub indeterministic: bool,
    pub support: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<ClassicalDecomposition>,
}

/// All deterministic models, by backtracking over edges in ascending size.
/// Output is sorted by support.
pub fn enumerate_deterministic(h: &ContextualityScenario) -> Vec<DeterministicModel> {
    #[derive(Clone, Copy, PartialEq, Eq)]
    enum State {
        Open,
        In,
        Out,
    }

    fn recurse(h: &ContextualityScenario, order: &[usize], state: &mut Vec<State>, out: &mut Vec<DeterministicModel>) {
        let Some((&edge, rest)) = order.split_first() else {
            let support = (0..state.len()).filter(|&v| state[v] == State::In).collect();
            out.push(DeterministicModel { support });
            return;
        };
        let e = &h.edges()[edge];
        let chosen = e.iter().filter(|&&v| state[v] == State::In).count();
        if chosen > 1 {
            return;
        }
        if chosen == 1 {
            let saved = state.clone();
            for &v in e {
                if state[v] == State::Open {
                    state[v] = State::Out;
                }
            }
            recurse(h, rest, state, out);
            *state = saved;
            return;
        }
        for &pick in e {
            if state[pick] != State::Open {
                continue;
            }
            let saved = state.clone();
            for &v in e {
                if state[v] == State::Open {
                    state[v] = if v == pick { State::In } else { State::Out };
                }
            }
            recurse(h, rest, state, out);
            *state = saved;
        }
    }

    let mut order: Vec<usize> = (0..h.num_edges()).collect();
    order.sort_by_key(|&e| h.edges()[e].len());
    let mut state = vec![State::Open; h.num_vertices()];
    let mut out = Vec::new();
    recurse(h, &order, &mut state, &mut out);
    out.sort();
    out
}

/// Exact LP over mixtures of the deterministic models. `None` means not
/// classical (always the case when there are no deterministic models).
pub fn is_classical(h: &ContextualityScenario, p: &ProbabilisticModel) -> Result<Option<ClassicalDecomposition>> {
    if p.values().len() != h.num_vertices() {
        return Err(Error::Dimension("model length differs from vertex count".into()));
    }
    let dets = enumerate_deterministic(h);
    if dets.is_empty() {
        return Ok(None);
    }
    let n = h.num_vertices();
    let k = dets.len();
    let mut a = RationalMatrix::zeros(n + 1, k);
    for (j, d) in dets.iter().enumerate() {
        for &v in &d.support {
            a.set(v, j, Rational::one());
        }
        a.set(n, j, Rational::one());
    }
    let mut rhs = p.values().to_vec();
    rhs.push(Rational::one());
    let Some(weights) = find_feasible(&a, &rhs)? else {
        return Ok(None);
    };
    let (weights, components) = weights
        .into_iter()
        .zip(dets)
        .filter(|(q, _)| q.is_positive())
        .unzip();
    Ok(Some(ClassicalDecomposition { weights, components }))
}

/// Decides whether `{A p = 1, p >= 0}` is empty, a single point, or larger.
pub fn has_unique_model(h: &ContextualityScenario) -> Result<UniquenessResult> {
    let a = h.incidence_matrix();
    let n = h.num_vertices();
    let ones = vec![Rational::one(); h.num_edges()];

    if a.null_space().is_empty() {
        // Full column rank: at most one solution of A p = 1 at all.
        return Ok(match a.solve(&ones)? {
            Some(p) if p.iter().all(|v| !v.is_negative()) => UniquenessResult::Unique(ProbabilisticModel::new(p)),
            _ => UniquenessResult::None,
        });
    }

    let Some(feasible) = find_feasible(&a, &ones)? else {
        return Ok(UniquenessResult::None);
    };
    for v in 0..n {
        let objective = (0..n).map(|j| if j == v { Rational::one() } else { Rational::zero() }).collect();
        let prob = LinearProgram::standard(objective, a.clone(), ones.clone());
        let hi = lp_solve(&prob, Sense::Maximize)?;
        let lo = lp_solve(&prob, Sense::Minimize)?;
        match (hi, lo) {
            (LpOutcome::Optimal { value: vh, point: ph }, LpOutcome::Optimal { value: vl, point: pl }) => {
                if vh != vl {
                    return Ok(UniquenessResult::Multiple(ProbabilisticModel::new(ph), ProbabilisticModel::new(pl)));
                }
            }
            // Edge normalization bounds every covered coordinate by 1.
            other => unreachable!("bounded feasible LP returned {other:?}"),
        }
    }
    Ok(UniquenessResult::Unique(ProbabilisticModel::new(feasible)))
}

/// As [`has_unique_model`], treating flagged subscenarios as model-free.
pub fn has_unique_model_induced(induced: &Induced) -> Result<UniquenessResult> {
    if induced.empty_edge {
        return Ok(UniquenessResult::None);
    }
    has_unique_model(&induced.scenario)
}

pub fn is_extremal(h: &ContextualityScenario, p: &ProbabilisticModel) -> Result<ExtremalityCertificate> {
    let support = p.support();
    let induced = h.induce_indices(&support)?;
    let uniqueness = has_unique_model_induced(&induced)?;
    let extremal = uniqueness.unique().is_some_and(|u| u == &p.restrict(&support));
    Ok(ExtremalityCertificate {
        extremal,
        support,
        uniqueness,
    })
}

/// All extremal models, as a canonically ordered vertex set.
pub fn enumerate_extremal(h: &ContextualityScenario, method: EnumerationMethod) -> Result<VertexSet> {
    match method {
        EnumerationMethod::Dd => {
            let ones = vec![Rational::one(); h.num_edges()];
            dd_vertices(&h.incidence_matrix(), &ones)
        }
        EnumerationMethod::Support => enumerate_by_support(h),
    }
}

/// Incrementally reduced set of linearly independent columns.
#[derive(Clone, Default)]
struct IndependentColumns {
    basis: Vec<(usize, Vec<Rational>)>,
}

impl IndependentColumns {
    /// Adds `col` if it is independent of the current basis.
    fn try_push(&mut self, mut col: Vec<Rational>) -> bool {
        for (pivot, b) in &self.basis {
            if col[*pivot].is_zero() {
                continue;
            }
            let f = col[*pivot].clone() / &b[*pivot];
            for (c, bv) in col.iter_mut().zip(b) {
                if !bv.is_zero() {
                    *c -= &f * bv;
                }
            }
        }
        match col.iter().position(|c| !c.is_zero()) {
            Some(pivot) => {
                self.basis.push((pivot, col));
                true
            }
            None => false,
        }
    }
}

fn enumerate_by_support(h: &ContextualityScenario) -> Result<VertexSet> {
    struct Search<'a> {
        h: &'a ContextualityScenario,
        columns: Vec<Vec<Rational>>,
        vertex_edges: Vec<Vec<usize>>,
        undecided: Vec<usize>,
        hits: Vec<usize>,
        chosen: Vec<usize>,
        found: Vec<Vec<Rational>>,
    }

    impl Search<'_> {
        fn run(&mut self, v: usize, basis: &IndependentColumns) -> Result<()> {
            if v == self.h.num_vertices() {
                return self.leaf();
            }
            // Include v: its column must stay independent of the chosen ones.
            let mut with = basis.clone();
            if with.try_push(self.columns[v].clone()) {
                self.chosen.push(v);
                for &e in &self.vertex_edges[v] {
                    self.undecided[e] -= 1;
                    self.hits[e] += 1;
                }
                self.run(v + 1, &with)?;
                for &e in &self.vertex_edges[v] {
                    self.undecided[e] += 1;
                    self.hits[e] -= 1;
                }
                self.chosen.pop();
            }
            // Exclude v: no edge through v may be left without a chosen vertex.
            for &e in &self.vertex_edges[v] {
                self.undecided[e] -= 1;
            }
            let viable = self.vertex_edges[v].iter().all(|&e| self.hits[e] > 0 || self.undecided[e] > 0);
            if viable {
                self.run(v + 1, basis)?;
            }
            for &e in &self.vertex_edges[v] {
                self.undecided[e] += 1;
            }
            Ok(())
        }

        fn leaf(&mut self) -> Result<()> {
            let induced = self.h.induce_indices(&self.chosen)?;
            if let UniquenessResult::Unique(p_s) = has_unique_model_induced(&induced)? {
                if p_s.values().iter().all(Signed::is_positive) {
                    let p = extend_model(self.h, &self.chosen, &p_s)?;
                    self.found.push(p.into_values());
                }
            }
            Ok(())
        }
    }

    let a = h.incidence_matrix();
    let n = h.num_vertices();
    let columns = (0..n).map(|v| (0..h.num_edges()).map(|e| a.get(e, v).clone()).collect()).collect();
    let mut vertex_edges = vec![Vec::new(); n];
    for (i, e) in h.edges().iter().enumerate() {
        for &v in e {
            vertex_edges[v].push(i);
        }
    }
    let mut search = Search {
        h,
        columns,
        vertex_edges,
        undecided: h.edges().iter().map(Vec::len).collect(),
        hits: vec![0; h.num_edges()],
        chosen: Vec::new(),
        found: Vec::new(),
    };
    search.run(0, &IndependentColumns::default())?;
    Ok(VertexSet::new(search.found))
}

pub fn classify_model(h: &ContextualityScenario, p: &ProbabilisticModel) -> Result<ClassificationReport> {
    let support_labels = |p: &ProbabilisticModel| -> Vec<String> {
        if p.values().len() != h.num_vertices() {
            return Vec::new();
        }
        p.support().iter().map(|&v| h.label(v).to_string()).collect()
    };
    if !is_valid_model(h, p) {
        return Ok(ClassificationReport {
            valid: false,
            deterministic: false,
            classical: false,
            extremal: false,
            indeterministic: false,
            support: support_labels(p),
            decomposition: None,
        });
    }
    let deterministic = p.is_deterministic();
    let decomposition = is_classical(h, p)?;
    let extremal = is_extremal(h, p)?.extremal;
    Ok(ClassificationReport {
        valid: true,
        deterministic,
        classical: decomposition.is_some(),
        extremal,
        indeterministic: !deterministic,
        support: support_labels(p),
        decomposition,
    })
}
