//! Contextuality scenarios (hypergraphs of outcomes), their incidence
//! matrices, induced subscenarios, and probabilistic models on them.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmath::rational::{format_rational, is_probability};
use crate::exactmath::{Rational, RationalMatrix, RationalVector};

/// A hypergraph whose vertices are outcomes and whose edges are complete
/// measurements. Edges are stored as ascending vertex indices; vertex order
/// is the declared label order.
#[derive(Clone, PartialEq, Eq)]
pub struct ContextualityScenario {
    labels: Vec<String>,
    edges: Vec<Vec<usize>>,
    index: HashMap<String, usize>,
}

/// Incidence matrix: one row per edge, one column per vertex.
pub type IncidenceMatrix = RationalMatrix;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioViolation {
    DuplicateLabel { label: String },
    UncoveredVertex { label: String },
    EmptyEdge { edge: usize },
    DuplicateEdge { edge: usize, first: usize },
}

impl fmt::Display for ScenarioViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DuplicateLabel { label } => write!(f, "duplicate vertex label {label:?}"),
            Self::UncoveredVertex { label } => write!(f, "vertex {label:?} is in no edge"),
            Self::EmptyEdge { edge } => write!(f, "edge {edge} is empty"),
            Self::DuplicateEdge { edge, first } => write!(f, "edge {edge} duplicates edge {first}"),
        }
    }
}

/// Raw on-disk scenario shape.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub vertices: Vec<String>,
    pub edges: Vec<Vec<String>>,
}

impl ContextualityScenario {
    /// Builds and validates a scenario from labelled edges.
    pub fn new<S: Into<String>>(vertices: Vec<S>, edges: Vec<Vec<S>>) -> Result<Self> {
        let h = Self::unchecked(vertices, edges)?;
        let report = h.validate();
        if report.is_empty() {
            Ok(h)
        } else {
            let msgs: Vec<String> = report.iter().map(ToString::to_string).collect();
            Err(Error::InvalidScenario(msgs.join("; ")))
        }
    }

    /// Resolves labels without checking the scenario conditions; only
    /// unknown labels are an error. Use [`Self::validate`] for the rest.
    pub fn unchecked<S: Into<String>>(vertices: Vec<S>, edges: Vec<Vec<S>>) -> Result<Self> {
        let labels: Vec<String> = vertices.into_iter().map(Into::into).collect();
        let mut index = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            index.entry(l.clone()).or_insert(i);
        }
        let edges = edges
            .into_iter()
            .map(|e| {
                let mut idx = e
                    .into_iter()
                    .map(|l| {
                        let l: String = l.into();
                        index.get(&l).copied().ok_or(Error::UnknownVertex(l))
                    })
                    .collect::<Result<Vec<usize>>>()?;
                idx.sort_unstable();
                idx.dedup();
                Ok(idx)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { labels, edges, index })
    }

    pub(crate) fn from_indices(labels: Vec<String>, edges: Vec<Vec<usize>>) -> Self {
        let index = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        Self { labels, edges, index }
    }

    /// Lists every violated scenario condition; empty means valid.
    pub fn validate(&self) -> Vec<ScenarioViolation> {
        let mut out = Vec::new();
        let mut seen = HashMap::new();
        for l in &self.labels {
            if seen.insert(l.as_str(), ()).is_some() {
                out.push(ScenarioViolation::DuplicateLabel { label: l.clone() });
            }
        }
        let mut covered = vec![false; self.labels.len()];
        for e in &self.edges {
            for &v in e {
                covered[v] = true;
            }
        }
        for (v, c) in covered.iter().enumerate() {
            if !c {
                out.push(ScenarioViolation::UncoveredVertex {
                    label: self.labels[v].clone(),
                });
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.is_empty() {
                out.push(ScenarioViolation::EmptyEdge { edge: i });
            }
            if let Some(first) = self.edges[..i].iter().position(|f| f == e) {
                out.push(ScenarioViolation::DuplicateEdge { edge: i, first });
            }
        }
        out
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn vertex_index(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn edge_labels(&self, edge: usize) -> Vec<String> {
        self.edges[edge].iter().map(|&v| self.labels[v].clone()).collect()
    }

    /// `|E| x |V|` 0/1 matrix with `(e, v) = 1` iff `v` is in `e`.
    pub fn incidence_matrix(&self) -> IncidenceMatrix {
        let mut a = RationalMatrix::zeros(self.edges.len(), self.labels.len());
        for (r, e) in self.edges.iter().enumerate() {
            for &v in e {
                a.set(r, v, Rational::one());
            }
        }
        a
    }

    /// Subscenario induced by the given vertex indices. Vertices keep this
    /// scenario's order; edges are `e ∩ S` with duplicates collapsed.
    pub fn induce_indices(&self, subset: &[usize]) -> Result<Induced> {
        let n = self.labels.len();
        let mut keep = vec![None; n];
        let mut members: Vec<usize> = subset.to_vec();
        if let Some(&bad) = members.iter().find(|&&v| v >= n) {
            return Err(Error::Dimension(format!("vertex index {bad} out of range")));
        }
        members.sort_unstable();
        members.dedup();
        for (new, &old) in members.iter().enumerate() {
            keep[old] = Some(new);
        }
        let mut empty_edge = false;
        let mut edges: Vec<Vec<usize>> = Vec::new();
        for e in &self.edges {
            let cut: Vec<usize> = e.iter().filter_map(|&v| keep[v]).collect();
            if cut.is_empty() {
                empty_edge = true;
            } else if !edges.contains(&cut) {
                edges.push(cut);
            }
        }
        let labels = members.iter().map(|&v| self.labels[v].clone()).collect();
        Ok(Induced {
            scenario: Self::from_indices(labels, edges),
            vertices: members,
            empty_edge,
        })
    }

    pub fn induce<S: AsRef<str>>(&self, subset: &[S]) -> Result<Induced> {
        let idx = subset
            .iter()
            .map(|l| {
                let l = l.as_ref();
                self.vertex_index(l).ok_or_else(|| Error::UnknownVertex(l.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        self.induce_indices(&idx)
    }

    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            vertices: self.labels.clone(),
            edges: (0..self.edges.len()).map(|e| self.edge_labels(e)).collect(),
        }
    }

    /// Parses and validates the raw file form.
    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        Self::new(file.vertices, file.edges)
    }
}

impl fmt::Debug for ContextualityScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<Vec<&str>> = self
            .edges
            .iter()
            .map(|e| e.iter().map(|&v| self.labels[v].as_str()).collect())
            .collect();
        f.debug_struct("ContextualityScenario")
            .field("vertices", &self.labels)
            .field("edges", &edges)
            .finish()
    }
}

/// Result of inducing a subscenario. `vertices` maps new indices back to
/// the parent scenario. `empty_edge` is set when some parent edge misses
/// the subset entirely; such a subscenario admits no probabilistic model.
#[derive(Clone, Debug)]
pub struct Induced {
    pub scenario: ContextualityScenario,
    pub vertices: Vec<usize>,
    pub empty_edge: bool,
}

/// Exact probability per vertex, in scenario vertex order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProbabilisticModel {
    values: RationalVector,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelViolation {
    WrongLength { expected: usize, found: usize },
    OutOfRange { label: String, value: String },
    EdgeSum { edge: usize, vertices: Vec<String>, sum: String },
}

impl fmt::Display for ModelViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::WrongLength { expected, found } => {
                write!(f, "model has {found} values, scenario has {expected} vertices")
            }
            Self::OutOfRange { label, value } => write!(f, "p({label}) = {value} is not in [0,1]"),
            Self::EdgeSum { edge, vertices, sum } => {
                write!(f, "edge {edge} {{{}}} sums to {sum}", vertices.join(","))
            }
        }
    }
}

impl ProbabilisticModel {
    pub fn new(values: RationalVector) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn into_values(self) -> RationalVector {
        self.values
    }

    pub fn value(&self, v: usize) -> &Rational {
        &self.values[v]
    }

    /// Indices with strictly positive probability.
    pub fn support(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&v| self.values[v].is_positive()).collect()
    }

    pub fn is_deterministic(&self) -> bool {
        self.values.iter().all(|v| v.is_zero() || v.is_one())
    }

    pub fn restrict(&self, vertices: &[usize]) -> Self {
        Self::new(vertices.iter().map(|&v| self.values[v].clone()).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(crate::exactmath::rational::to_f64).collect()
    }

    pub fn by_label(&self, h: &ContextualityScenario) -> Vec<(String, String)> {
        h.labels()
            .iter()
            .zip(&self.values)
            .map(|(l, v)| (l.clone(), format_rational(v)))
            .collect()
    }
}

/// Checks the range condition and every edge normalization, exactly.
pub fn validate_model(h: &ContextualityScenario, p: &ProbabilisticModel) -> Vec<ModelViolation> {
    if p.values.len() != h.num_vertices() {
        return vec![ModelViolation::WrongLength {
            expected: h.num_vertices(),
            found: p.values.len(),
        }];
    }
    let mut out = Vec::new();
    for (v, value) in p.values.iter().enumerate() {
        if !is_probability(value) {
            out.push(ModelViolation::OutOfRange {
                label: h.label(v).to_string(),
                value: format_rational(value),
            });
        }
    }
    for (i, e) in h.edges().iter().enumerate() {
        let sum = e.iter().fold(Rational::zero(), |acc, &v| acc + &p.values[v]);
        if !sum.is_one() {
            out.push(ModelViolation::EdgeSum {
                edge: i,
                vertices: h.edge_labels(i),
                sum: format_rational(&sum),
            });
        }
    }
    out
}

pub fn is_valid_model(h: &ContextualityScenario, p: &ProbabilisticModel) -> bool {
    validate_model(h, p).is_empty()
}

/// Extension of a model on an induced subscenario: copies values on the
/// subset, zero elsewhere. Fails if `p_s` is not a model on the induced
/// scenario, or if the zero-padded vector breaks some parent edge.
pub fn extend_model(h: &ContextualityScenario, subset: &[usize], p_s: &ProbabilisticModel) -> Result<ProbabilisticModel> {
    let induced = h.induce_indices(subset)?;
    if induced.empty_edge {
        return Err(Error::InvalidModel(
            "subset misses an edge entirely; the induced subscenario has no models".into(),
        ));
    }
    let report = validate_model(&induced.scenario, p_s);
    if !report.is_empty() {
        let msgs: Vec<String> = report.iter().map(ToString::to_string).collect();
        return Err(Error::InvalidModel(format!("not a model on the induced subscenario: {}", msgs.join("; "))));
    }
    let mut values = vec![Rational::zero(); h.num_vertices()];
    for (new, &old) in induced.vertices.iter().enumerate() {
        values[old] = p_s.values[new].clone();
    }
    let p = ProbabilisticModel::new(values);
    let report = validate_model(h, &p);
    if !report.is_empty() {
        let msgs: Vec<String> = report.iter().map(ToString::to_string).collect();
        return Err(Error::InvalidModel(format!("extension is not normalized: {}", msgs.join("; "))));
    }
    Ok(p)
}
